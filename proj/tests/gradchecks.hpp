#pragma once

// Finite-difference checks of each layer's backward pass. Each returns the
// worst relative error over the inputs and parameters for one random draw.
// The scalar loss is a fixed random projection <f(x), r> of the layer output.

#include <algorithm>

#include "qocr/ctc.hpp"
#include "qocr/nn.hpp"
#include "support.hpp"

namespace gradcheck {

using qocr::Shape;
using qocr::SplitMix64;
using qocr::Tensor;
using testing::dot;
using testing::random_tensor;
using testing::worst_error;

// Values spaced 0.01 apart, so a 1e-5 step never changes a pooling winner.
inline Tensor distinct_tensor(const Shape& shape, SplitMix64& rng) {
    Tensor t(shape);
    std::vector<std::size_t> order(t.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.01 * static_cast<double>(order[i]) - 0.5;
    return t;
}

inline double conv(std::uint64_t seed) {
    using namespace qocr;
    SplitMix64 rng(100 + seed);
    const std::size_t n = 1 + rng.below(2), w = 3 + rng.below(4), h = 2 + rng.below(3), ci = 1 + rng.below(3),
                      co = 1 + rng.below(3), kw = 1 + 2 * rng.below(2), kh = 1 + 2 * rng.below(2);
    auto x = random_tensor({n, w, h, ci}, rng);
    nn::ConvParams p{random_tensor({kw, kh, ci, co}, rng), random_tensor({co}, rng)};
    const auto r = random_tensor({n, w, h, co}, rng);
    auto loss = [&] { return dot(nn::conv2d_forward(x, p), r); };
    const auto g = nn::conv2d_backward(x, p, r);
    return std::max({worst_error(x, g.input, loss), worst_error(p.kernels, g.kernels, loss),
                     worst_error(p.bias, g.bias, loss)});
}

inline double batchnorm(std::uint64_t seed) {
    using namespace qocr;
    SplitMix64 rng(200 + seed);
    const std::size_t n = 2 + rng.below(2), w = 2 + rng.below(3), c = 1 + rng.below(4);
    auto x = random_tensor({n, w, 2, c}, rng);
    auto p = nn::init_batchnorm(c);
    p.gamma = random_tensor({c}, rng, 0.5, 1.5);
    p.beta = random_tensor({c}, rng);
    const auto r = random_tensor({n, w, 2, c}, rng);
    auto loss = [&] { return dot(nn::batchnorm_forward(x, p, nn::Mode::train).output, r); };
    const auto g = nn::batchnorm_backward(nn::batchnorm_forward(x, p, nn::Mode::train).cache, p, r);
    return std::max({worst_error(x, g.input, loss), worst_error(p.gamma, g.gamma, loss),
                     worst_error(p.beta, g.beta, loss)});
}

inline double maxpool(std::uint64_t seed) {
    using namespace qocr;
    SplitMix64 rng(300 + seed);
    const std::size_t pw = 1 + rng.below(2), ph = 1 + rng.below(2);
    const std::size_t n = 1 + rng.below(2), w = pw * (1 + rng.below(3)), h = ph * (1 + rng.below(3)),
                      c = 1 + rng.below(3);
    auto x = distinct_tensor({n, w, h, c}, rng);
    const auto res = nn::maxpool_forward(x, {pw, ph});
    const auto r = random_tensor(res.output.shape(), rng);
    auto loss = [&] { return dot(nn::maxpool_forward(x, {pw, ph}).output, r); };
    return worst_error(x, nn::maxpool_backward(x.shape(), res.argmax, r), loss);
}

inline double lstm(std::uint64_t seed) {
    using namespace qocr;
    SplitMix64 rng(400 + seed);
    const std::size_t n = 1 + rng.below(2), t = 2 + rng.below(4), d = 1 + rng.below(4), hd = 1 + rng.below(4);
    auto x = random_tensor({n, t, d}, rng);
    auto p = nn::init_lstm(d, hd, rng);
    p.bias = random_tensor(p.bias.shape(), rng, -0.5, 0.5);
    const auto dir = seed % 2 ? nn::Direction::backward : nn::Direction::forward;
    const auto r = random_tensor({n, t, hd}, rng);
    auto loss = [&] { return dot(nn::lstm_forward(x, p, dir).output, r); };
    const auto g = nn::lstm_backward(nn::lstm_forward(x, p, dir).cache, p, r);
    return std::max({worst_error(x, g.input, loss), worst_error(p.input_weights, g.input_weights, loss),
                     worst_error(p.recurrent_weights, g.recurrent_weights, loss), worst_error(p.bias, g.bias, loss)});
}

inline double bilstm(std::uint64_t seed) {
    using namespace qocr;
    SplitMix64 rng(500 + seed);
    const std::size_t n = 1 + rng.below(2), t = 2 + rng.below(3), d = 1 + rng.below(3), hd = 1 + rng.below(3);
    auto x = random_tensor({n, t, d}, rng);
    nn::BiLstmParams p{nn::init_lstm(d, hd, rng), nn::init_lstm(d, hd, rng)};
    const auto r = random_tensor({n, t, 2 * hd}, rng);
    auto loss = [&] { return dot(nn::bidirectional_lstm(x, p).output, r); };
    const auto g = nn::bidirectional_lstm_backward(nn::bidirectional_lstm(x, p), p, r);
    return std::max({worst_error(x, g.input, loss), worst_error(p.forward.input_weights, g.forward.input_weights, loss),
                     worst_error(p.forward.recurrent_weights, g.forward.recurrent_weights, loss),
                     worst_error(p.backward.input_weights, g.backward.input_weights, loss),
                     worst_error(p.backward.recurrent_weights, g.backward.recurrent_weights, loss),
                     worst_error(p.backward.bias, g.backward.bias, loss)});
}

inline double projection(std::uint64_t seed) {
    using namespace qocr;
    SplitMix64 rng(600 + seed);
    const std::size_t n = 1 + rng.below(2), t = 1 + rng.below(4), in = 1 + rng.below(5), out = 1 + rng.below(5);
    auto x = random_tensor({n, t, in}, rng);
    auto p = nn::init_dense(in, out, rng);
    p.bias = random_tensor({out}, rng);
    const auto r = random_tensor({n, t, out}, rng);
    auto loss = [&] { return dot(nn::project(x, p), r); };
    const auto g = nn::project_backward(x, p, r);
    return std::max({worst_error(x, g.input, loss), worst_error(p.weight, g.weight, loss),
                     worst_error(p.bias, g.bias, loss)});
}

inline double ctc(std::uint64_t seed) {
    using namespace qocr;
    SplitMix64 rng(700 + seed);
    const std::size_t V = 1 + rng.below(4), T = 6 + rng.below(4);
    ctc::LabelSequence label;
    for (std::size_t i = 0, L = 1 + rng.below(3); i < L; ++i) label.push_back(rng.below(V));
    auto logits = random_tensor({T, V + 1}, rng, -3.0, 3.0);
    const auto g = ctc::ctc_loss(logits, label).grad_logits;
    return worst_error(logits, g, [&] { return ctc::ctc_loss(logits, label).loss; }, 1000);
}

}  // namespace gradcheck
