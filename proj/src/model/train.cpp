#include <numeric>

#include "qocr/error.hpp"
#include "qocr/metrics.hpp"
#include "qocr/model.hpp"
#include "qocr/rng.hpp"

namespace qocr::model {

PreparedSet prepare(const TrainingState& state, const dataset::Repository& repo,
                    const std::vector<std::size_t>& indices) {
    PreparedSet set;
    set.record_ids = indices;
    set.images.resize(indices.size());
    set.words.resize(indices.size());
    set.labels.resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= repo.size())
            throw ArgumentError("record index " + std::to_string(indices[i]) + " out of range");
        set.words[i] = repo.record(indices[i]).word;
        set.labels[i] = encode_label(state, set.words[i]);
    }
    const auto n = static_cast<std::ptrdiff_t>(indices.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        set.images[i] =
            dataset::preprocess_resize(repo.image(indices[i]), state.config.input_width, state.config.input_height);
    }
    return set;
}

Batch make_batch(const PreparedSet& set, const std::vector<std::size_t>& positions) {
    if (positions.empty()) throw ArgumentError("cannot build an empty batch");
    const Shape& img = set.images.at(positions.front()).shape();
    const std::size_t W = img.at(0), H = img.at(1);
    Batch b;
    b.images = Tensor({positions.size(), W, H});
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const auto p = positions[i];
        std::copy_n(set.images.at(p).data(), W * H, b.images.data() + i * W * H);
        b.labels.push_back(set.labels[p]);
        b.record_ids.push_back(set.record_ids[p]);
    }
    return b;
}

std::vector<std::size_t> batch_positions(std::size_t set_size, std::size_t batch_size, std::uint64_t seed,
                                         std::uint64_t iteration) {
    if (set_size == 0 || batch_size == 0) throw ArgumentError("training set and batch size must be non-empty");
    const std::uint64_t per_epoch = (set_size + batch_size - 1) / batch_size;
    const std::uint64_t epoch = iteration / per_epoch;
    const std::uint64_t slot = iteration % per_epoch;
    std::vector<std::size_t> order(set_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(derive_seed(seed, epoch));
    for (std::size_t i = set_size - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    const std::size_t begin = slot * batch_size;
    const std::size_t end = std::min(set_size, begin + batch_size);
    return {order.begin() + static_cast<std::ptrdiff_t>(begin), order.begin() + static_cast<std::ptrdiff_t>(end)};
}

TrainResult train(TrainingState& state, const dataset::Repository& repo, const dataset::Split& split,
                  const Schedule& schedule) {
    if (split.train.empty()) throw ArgumentError("training split is empty");
    const auto train_set = prepare(state, repo, split.train);
    const auto val_set = split.validate.empty() ? train_set : prepare(state, repo, split.validate);
    const std::size_t B = std::max<std::size_t>(1, state.hyper.batch_size);
    const std::uint64_t per_epoch = (train_set.images.size() + B - 1) / B;
    const std::uint64_t every = schedule.eval_every ? schedule.eval_every : per_epoch;

    TrainResult result;
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    while (state.iteration < schedule.iterations) {
        const auto batch = make_batch(train_set, batch_positions(train_set.images.size(), B, state.seed, state.iteration));
        const double loss = train_step(state, batch).mean_loss;
        if (schedule.on_step) schedule.on_step(state.iteration, loss);
        loss_sum += loss;
        ++loss_count;
        if (state.iteration % every != 0 && state.iteration != schedule.iterations) continue;

        const auto eval = metrics::evaluate_prepared(state, val_set, "validate");
        EpochReport rep{state.iteration / per_epoch, state.iteration, loss_sum / static_cast<double>(loss_count),
                        eval.crr, eval.wrr};
        loss_sum = 0.0;
        loss_count = 0;
        result.reports.push_back(rep);
        if (schedule.on_report) schedule.on_report(rep, state);
        if (rep.crr > result.best_crr) {
            result.best_crr = rep.crr;
            result.best = state;
            if (schedule.on_best) schedule.on_best(state);
        }
        if (schedule.stop_when && schedule.stop_when(rep)) break;
    }
    return result;
}

}  // namespace qocr::model
