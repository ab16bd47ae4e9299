#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "qocr/dataset.hpp"
#include "qocr/model.hpp"
#include "support.hpp"

namespace fixtures {

// Small enough that finite differences over the whole network run in milliseconds:
// 16x4 input, two conv blocks, 8 time steps, a 2-layer BiLSTM with 3 units.
inline qocr::model::ModelConfig tiny_config(std::size_t vocab_size = 3) {
    qocr::model::ModelConfig c;
    c.name = "tiny";
    c.input_width = 16;
    c.input_height = 4;
    c.conv = {{3, 2, {2, 2}}, {3, 3, {1, 2}}};
    c.lstm_hidden = 3;
    c.lstm_layers = 2;
    c.vocab_size = vocab_size;
    return c;
}

inline qocr::Vocabulary tiny_vocabulary() { return qocr::Vocabulary({"a", "b", "c"}); }

struct GradCheck {
    double worst = 0.0;
    std::size_t checked = 0;
    std::size_t kinks = 0;  // points where the one-sided derivatives disagree (ReLU or pooling switch)
    std::size_t tensors = 0;
};

// Whole-network gradient of the mean CTC loss against central differences.
inline GradCheck end_to_end_gradient_check(std::uint64_t seed, std::size_t per_tensor = 16, double h = 1e-5) {
    using namespace qocr;
    auto state = model::build_model(tiny_config(), tiny_vocabulary(), seed);
    SplitMix64 rng(derive_seed(seed, 99));
    model::Batch batch;
    batch.images = testing::random_tensor({2, 16, 4}, rng, -1.5, 1.5);
    batch.labels = {{0, 1, 2}, {2, 2}};
    // Perturb the zero-initialized biases and BN shifts so every path carries signal.
    for (auto& t : state.params.trainable())
        for (auto& v : t.tensor->values()) v += rng.uniform(-0.3, 0.3);

    const auto analytic = model::loss_and_gradients(state.config, state.params, batch).grads;
    auto loss = [&] { return model::loss_and_gradients(state.config, state.params, batch).mean_loss; };

    GradCheck out;
    auto params = state.params.trainable();
    const auto grads = analytic.trainable();
    out.tensors = params.size();
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i].tensor;
        for (std::size_t c = 0; c < std::min(per_tensor, p.size()); ++c) {
            const std::size_t j = rng.below(p.size());
            double& x = p[j];
            const double saved = x;
            const double f0 = loss();
            x = saved + h;
            const double up = loss();
            x = saved - h;
            const double down = loss();
            x = saved;
            const double numeric = (up - down) / (2 * h);
            const double err = testing::rel_err((*grads[i].tensor)[j], numeric);
            if (err > 1e-3) {
                const double right = (up - f0) / h, left = (f0 - down) / h;
                if (testing::rel_err(right, left) > 1e-2) {
                    ++out.kinks;
                    continue;
                }
            }
            out.worst = std::max(out.worst, err);
            ++out.checked;
        }
    }
    return out;
}

// 50 distinct words of 7-10 symbols rendered in two synthetic fonts.
inline qocr::dataset::Repository toy_repository(std::uint64_t seed = 2024) {
    qocr::dataset::RendererConfig cfg;
    cfg.seed = seed;
    const auto words = qocr::dataset::random_words(cfg.vocabulary, 50, 7, 10, seed);
    return qocr::dataset::generate_samples(words, {0, 1}, cfg);
}

}  // namespace fixtures
