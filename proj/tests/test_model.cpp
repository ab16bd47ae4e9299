#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "qocr/error.hpp"
#include "qocr/metrics.hpp"
#include "qocr/model.hpp"
#include "support.hpp"

using namespace qocr;
using namespace qocr::model;

namespace {

Batch random_batch(const TrainingState& s, std::size_t n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Batch b;
    b.images = testing::random_tensor({n, s.config.input_width, s.config.input_height}, rng);
    for (std::size_t i = 0; i < n; ++i) b.labels.push_back({rng.below(3), rng.below(3)});
    return b;
}

std::vector<std::uint8_t> file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("default network reproduces the reference shape chain") {
    const auto cfg = ModelConfig::paper();
    const auto chain = conv_shape_chain(cfg);
    const std::vector<FeatureShape> want{{64, 16, 32}, {32, 8, 64}, {32, 4, 128}, {32, 2, 128}, {32, 1, 256}};
    CHECK(chain == want);
    CHECK(time_steps(cfg) == 32);

    const auto state = build_model(cfg, Vocabulary::arabic_default(), 1);
    const auto trace = forward_trace(cfg, state.params, Tensor({1, 128, 32}), nn::Mode::infer);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(trace.blocks[i].pool_out.shape() == Shape{1, want[i].width, want[i].height, want[i].channels});
    CHECK(trace.sequence.shape() == Shape{1, 32, 256});
    CHECK(trace.logits.shape() == Shape{1, 32, 39});
}

TEST_CASE("config validation names the offending layer") {
    auto cfg = ModelConfig::paper();
    cfg.conv[2].kernel = 4;
    try {
        validate_config(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("conv layer 3") != std::string::npos);
    }
    cfg = ModelConfig::paper();
    cfg.conv[1].filters = 48;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    cfg.name = "custom";
    CHECK_NOTHROW(validate_config(cfg));
    cfg.conv.pop_back();
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    CHECK_THROWS_AS(ModelConfig::preset("huge"), ConfigError);
    CHECK_NOTHROW(validate_config(ModelConfig::toy()));
}

TEST_CASE("end-to-end gradient matches finite differences") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto r = fixtures::end_to_end_gradient_check(seed);
        CHECK(r.checked >= 200);
        CHECK(r.worst < 1e-3);
        CHECK(r.kinks * 100 <= r.checked);
    }
}

TEST_CASE("label encoding follows the time axis") {
    const auto s = build_model(ModelConfig::paper(), Vocabulary::arabic_default(), 1);
    const auto ids = s.vocabulary.encode("كتب");
    CHECK(encode_label(s, "كتب") == ctc::LabelSequence{ids[2], ids[1], ids[0]});
    CHECK(decode_label(s, encode_label(s, "كتب")) == "كتب");
    auto ltr = s;
    ltr.config.right_to_left = false;
    CHECK(encode_label(ltr, "كتب") == ids);
}

TEST_CASE("infeasible labels name the record") {
    auto s = build_model(fixtures::tiny_config(), fixtures::tiny_vocabulary(), 1);
    Batch b;
    b.images = Tensor({1, 16, 4});
    b.labels = {{0, 0, 0, 0, 0}};  // needs 9 steps, the tiny network has 8
    b.record_ids = {42};
    try {
        train_step(s, b);
        FAIL("expected InfeasibleLabelError");
    } catch (const InfeasibleLabelError& e) {
        CHECK(std::string(e.what()).find("record 42") != std::string::npos);
    }
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
    Hyperparameters h;
    h.learning_rate = 0.0;
    auto s = build_model(fixtures::tiny_config(), fixtures::tiny_vocabulary(), 3, h);
    const auto before = s.params;
    for (int i = 0; i < 3; ++i) train_step(s, random_batch(s, 2, i));
    const auto a = s.params.trainable();
    const auto b = const_cast<ModelParams&>(before).trainable();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i].tensor == *b[i].tensor);
    CHECK(s.iteration == 3);
}

TEST_CASE("rmsprop update matches its closed form") {
    Hyperparameters h;
    h.learning_rate = 0.01;
    auto s = build_model(fixtures::tiny_config(), fixtures::tiny_vocabulary(), 4, h);
    auto grads = s.params;
    SplitMix64 rng(5);
    for (auto& t : grads.trainable())
        for (auto& v : t.tensor->values()) v = rng.uniform(-1, 1);
    const auto before = s.params;
    apply_rmsprop(s, grads);
    auto after = s.params.trainable();
    const auto old = const_cast<ModelParams&>(before).trainable();
    const auto g = grads.trainable();
    for (std::size_t i = 0; i < after.size(); ++i)
        for (std::size_t j = 0; j < after[i].tensor->size(); ++j) {
            const double gj = (*g[i].tensor)[j];
            const double acc = 0.1 * gj * gj;
            CHECK(s.accumulators[i][j] == doctest::Approx(acc).epsilon(1e-14));
            CHECK((*after[i].tensor)[j] ==
                  doctest::Approx((*old[i].tensor)[j] - 0.01 * gj / (std::sqrt(acc) + 1e-8)).epsilon(1e-14));
        }
}

TEST_CASE("training is bitwise reproducible") {
    auto run = [] {
        auto s = build_model(fixtures::tiny_config(), fixtures::tiny_vocabulary(), 8);
        std::vector<double> losses;
        for (int i = 0; i < 5; ++i) losses.push_back(train_step(s, random_batch(s, 3, 100 + i)).mean_loss);
        return std::pair{losses, s.params.projection.weight};
    };
    CHECK(run() == run());
}

TEST_CASE("batch order depends only on the iteration counter") {
    const std::size_t n = 23, B = 5;
    for (std::uint64_t epoch = 0; epoch < 3; ++epoch) {
        std::vector<std::size_t> seen;
        for (std::uint64_t it = epoch * 5; it < epoch * 5 + 5; ++it) {
            const auto pos = batch_positions(n, B, 7, it);
            CHECK(pos == batch_positions(n, B, 7, it));
            seen.insert(seen.end(), pos.begin(), pos.end());
        }
        std::sort(seen.begin(), seen.end());
        REQUIRE(seen.size() == n);
        for (std::size_t i = 0; i < n; ++i) CHECK(seen[i] == i);
    }
    CHECK(batch_positions(n, B, 7, 0) != batch_positions(n, B, 7, 5));
}

TEST_CASE("checkpoint round trip is bit exact") {
    testing::TempDir dir("ckpt");
    auto s = build_model(fixtures::tiny_config(), fixtures::tiny_vocabulary(), 9);
    for (int i = 0; i < 2; ++i) train_step(s, random_batch(s, 2, i));
    save_checkpoint(s, dir / "a.ckpt");
    const auto back = load_checkpoint(dir / "a.ckpt");
    CHECK(back.config == s.config);
    CHECK(back.vocabulary == s.vocabulary);
    CHECK(back.iteration == 2);
    CHECK(back.seed == 9);
    CHECK(back.hyper == s.hyper);
    CHECK(back.accumulators == s.accumulators);
    const auto a = const_cast<TrainingState&>(back).params.tensors();
    const auto b = s.params.tensors();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i].tensor == *b[i].tensor);
    save_checkpoint(back, dir / "b.ckpt");
    CHECK(file_bytes(dir / "a.ckpt") == file_bytes(dir / "b.ckpt"));
}

TEST_CASE("checkpoint corruption, version and mismatch are distinguished") {
    testing::TempDir dir("ckpt_bad");
    const auto s = build_model(fixtures::tiny_config(), fixtures::tiny_vocabulary(), 9);
    save_checkpoint(s, dir / "good.ckpt");
    const auto bytes = file_bytes(dir / "good.ckpt");
    auto write = [&](const std::string& name, const std::vector<std::uint8_t>& b) {
        std::ofstream out(dir / name, std::ios::binary);
        out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
        return dir / name;
    };
    auto flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x40;
    CHECK_THROWS_AS(load_checkpoint(write("flip.ckpt", flipped)), CheckpointCorruptError);
    CHECK_THROWS_AS(load_checkpoint(write("short.ckpt", {bytes.begin(), bytes.end() - 5})), CheckpointCorruptError);
    auto versioned = bytes;
    versioned[4] = 9;
    CHECK_THROWS_AS(load_checkpoint(write("ver.ckpt", versioned)), CheckpointVersionError);
    CHECK_THROWS_AS(load_checkpoint(write("magic.ckpt", {'N', 'O', 'P', 'E', 1, 0})), CheckpointCorruptError);
    CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), IoError);

    // A consistent file whose tensors disagree with its own config.
    auto other = s;
    other.params.projection.weight = Tensor({4, 5});
    save_checkpoint(other, dir / "mismatch.ckpt");
    CHECK_THROWS_AS(load_checkpoint(dir / "mismatch.ckpt"), CheckpointMismatchError);
}

TEST_CASE("resumed training matches uninterrupted training") {
    testing::TempDir dir("resume");
    const auto repo = fixtures::toy_repository(3);
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < 8; ++i) subset.push_back(i);
    Hyperparameters h;
    h.batch_size = 3;
    auto cfg = fixtures::tiny_config(38);
    cfg.input_width = 128;
    cfg.input_height = 16;
    cfg.conv = {{3, 2, {2, 2}}, {3, 3, {1, 2}}, {3, 3, {1, 4}}};

    auto fresh = build_model(cfg, Vocabulary::arabic_default(), 11, h);
    const auto set = prepare(fresh, repo, subset);
    auto run = [&](TrainingState& s, std::uint64_t until) {
        std::vector<double> losses;
        while (s.iteration < until) losses.push_back(train_step(s, make_batch(set, batch_positions(8, 3, s.seed, s.iteration))).mean_loss);
        return losses;
    };
    auto straight = fresh;
    const auto all = run(straight, 7);

    auto first = fresh;
    auto head = run(first, 4);
    save_checkpoint(first, dir / "mid.ckpt");
    auto resumed = load_checkpoint(dir / "mid.ckpt");
    const auto tail = run(resumed, 7);
    head.insert(head.end(), tail.begin(), tail.end());
    CHECK(head == all);
    CHECK(resumed.params.projection.weight == straight.params.projection.weight);
}

TEST_CASE("recognize handles a batch and a single image alike") {
    const auto repo = fixtures::toy_repository(4);
    const auto s = build_model(ModelConfig::toy(), Vocabulary::arabic_default(), 1);
    const auto set = prepare(s, repo, {0, 1, 2});
    const auto all = recognize_all(s, set.images);
    REQUIRE(all.size() == 3);
    CHECK(recognize(s, repo.image(1)) == all[1]);
    const auto act = inspect_activations(s, repo.image(0));
    CHECK(act.blocks.size() == 5);
    CHECK(act.logits.shape() == Shape{32, 39});
    CHECK(act.argmax.size() == 32);
}
