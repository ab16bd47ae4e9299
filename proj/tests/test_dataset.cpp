#include <cmath>
#include <fstream>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "qocr/dataset.hpp"
#include "qocr/error.hpp"
#include "support.hpp"

using namespace qocr;
using namespace qocr::dataset;

namespace {

std::vector<std::uint8_t> file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Repository small_repo(std::uint64_t seed = 5) {
    RendererConfig cfg;
    cfg.seed = seed;
    const auto words = random_words(cfg.vocabulary, 6, 3, 6, seed);
    return generate_samples(words, {0, 1}, cfg);
}

}  // namespace

TEST_CASE("payload round trip and validation") {
    GrayImage img(3, 2, std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6});
    const auto bytes = encode_payload(img);
    CHECK(bytes.size() == 8 + 6);
    CHECK(bytes[0] == 3);
    CHECK(bytes[4] == 2);
    CHECK(decode_payload(bytes) == img);
    CHECK_THROWS_AS(decode_payload(std::span(bytes).first(7)), ParseError);
    CHECK_THROWS_AS(decode_payload(std::span(bytes).first(13)), ParseError);
}

TEST_CASE("pgm round trip") {
    testing::TempDir dir("pgm");
    GrayImage img(4, 3);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 20);
    write_pgm(dir / "a.pgm", img);
    CHECK(read_pgm(dir / "a.pgm") == img);
}

TEST_CASE("repository write/read is bit identical") {
    testing::TempDir dir("repo");
    const auto repo = small_repo();
    write_repository(repo, dir / "a");
    const auto back = read_repository(dir / "a");
    CHECK(back == repo);
    write_repository(back, dir / "b");
    CHECK(file_bytes(dir / "a/labels.tsv") == file_bytes(dir / "b/labels.tsv"));
    CHECK(file_bytes(dir / "a/images.bin") == file_bytes(dir / "b/images.bin"));
    for (std::size_t i = 0; i < repo.size(); ++i) CHECK(back.image(i) == repo.image(i));
}

TEST_CASE("records are packed back to back") {
    const auto repo = small_repo();
    std::uint64_t next = 0;
    for (const auto& r : repo.records()) {
        CHECK(r.start_offset == next);
        next += r.byte_length;
    }
    CHECK(next == repo.blob().size());
}

TEST_CASE("truncated or padded blobs are detected") {
    testing::TempDir dir("trunc");
    const auto repo = small_repo();
    write_repository(repo, dir.path());
    auto blob = file_bytes(dir / kBlobFile);
    {
        std::ofstream out(dir / kBlobFile, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size() - 1));
    }
    try {
        read_repository(dir.path());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        // The last record is on line size() + 1 of the labels file.
        CHECK(std::string(e.what()).find("labels line " + std::to_string(repo.size() + 1)) != std::string::npos);
    }
    blob.push_back(0);
    {
        std::ofstream out(dir / kBlobFile, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
    }
    CHECK_THROWS_AS(read_repository(dir.path()), ParseError);
}

TEST_CASE("malformed labels report their line") {
    testing::TempDir dir("labels");
    write_repository(small_repo(), dir.path());
    std::ofstream(dir / kLabelsFile, std::ios::app) << "word\t0\tbold\tx\t0\t0\n";
    try {
        read_repository(dir.path());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("labels line 14") != std::string::npos);
    }
    std::ofstream(dir / kLabelsFile, std::ios::trunc) << "WRONG\n";
    CHECK_THROWS_AS(read_repository(dir.path()), ParseError);
    CHECK_THROWS_AS(read_repository(dir / "missing"), IoError);
}

TEST_CASE("non-sequential offsets are rejected") {
    auto repo = small_repo();
    auto records = repo.records();
    std::swap(records[0].start_offset, records[1].start_offset);
    CHECK_THROWS_AS(Repository(records, repo.blob()).validate(), ParseError);
}

TEST_CASE("random words are distinct, in range, and seeded") {
    const auto vocab = Vocabulary::arabic_default();
    const auto words = random_words(vocab, 50, 7, 10, 1);
    CHECK(words.size() == 50);
    CHECK(std::set<std::string>(words.begin(), words.end()).size() == 50);
    for (const auto& w : words) {
        const auto n = vocab.encode(w).size();
        CHECK(n >= 7);
        CHECK(n <= 10);
    }
    CHECK(random_words(vocab, 50, 7, 10, 1) == words);
    CHECK(random_words(vocab, 50, 7, 10, 2) != words);
    CHECK_THROWS_AS(random_words(Vocabulary({"a", "b"}), 5, 1, 1, 0), ArgumentError);
}

TEST_CASE("renderer is deterministic and lays glyphs out right to left") {
    RendererConfig cfg;
    cfg.seed = 9;
    const std::string word = "كتاب";
    const auto a = render_word(word, 3, cfg);
    CHECK(a == render_word(word, 3, cfg));
    CHECK(a != render_word(word, 4, cfg));
    std::size_t ink = 0;
    for (auto p : a.pixels) ink += p < 128;
    CHECK(ink > 0);

    const auto layout = layout_word(4, 3, cfg);
    REQUIRE(layout.cells.size() == 4);
    CHECK(layout.width == a.width);
    for (std::size_t i = 1; i < 4; ++i) CHECK(layout.cells[i].second <= layout.cells[i - 1].first);

    // A glyph's mask is a property of the symbol and seed alone.
    CHECK(glyph_mask(3, 9) == glyph_mask(3, 9));
    CHECK(glyph_mask(3, 9) != glyph_mask(4, 9));
}

TEST_CASE("generate_samples is word-major and rejects foreign symbols") {
    RendererConfig cfg;
    const auto repo = generate_samples({"بيت", "باب"}, {0, 7}, cfg);
    REQUIRE(repo.size() == 4);
    CHECK(repo.record(0).word == "بيت");
    CHECK(repo.record(1).font_id == 7);
    CHECK(repo.record(2).word == "باب");
    CHECK(repo.image(1) == render_word("بيت", 7, cfg));
    CHECK_THROWS_AS(generate_samples({"abc"}, {0}, cfg), VocabularyError);
}

TEST_CASE("salt and pepper flips pixels at the requested density") {
    const GrayImage gray(400, 250, 128);
    const double d = 0.05;
    const auto noisy = add_salt_pepper(gray, d, 77);
    std::size_t black = 0, white = 0, other = 0;
    for (auto p : noisy.pixels) {
        if (p == 0) ++black;
        else if (p == 255) ++white;
        else if (p == 128) ++other;
    }
    const double n = static_cast<double>(gray.pixels.size());
    CHECK(black + white + other == gray.pixels.size());
    // Each of black and white is Binomial(n, d/2); allow five standard deviations.
    const double mean = n * d / 2, sd = std::sqrt(n * d / 2 * (1 - d / 2));
    CHECK(std::abs(black - mean) < 5 * sd);
    CHECK(std::abs(white - mean) < 5 * sd);
    CHECK(add_salt_pepper(gray, 0.0, 1) == gray);
    CHECK_THROWS_AS(add_salt_pepper(gray, 1.5, 1), ArgumentError);
}

TEST_CASE("speckle is multiplicative with the requested variance") {
    const GrayImage gray(400, 250, 100);
    const double var = 0.01;
    const auto noisy = add_speckle(gray, var, 78);
    double m = 0.0, s = 0.0;
    for (auto p : noisy.pixels) m += p;
    const double n = static_cast<double>(gray.pixels.size());
    m /= n;
    for (auto p : noisy.pixels) s += (p - m) * (p - m);
    s /= n - 1;
    // Rounding adds 1/12 to the variance of 100 * (1 + sigma z).
    const double want = 100.0 * 100.0 * var + 1.0 / 12.0;
    CHECK(std::abs(m - 100.0) < 5 * std::sqrt(want / n));
    CHECK(std::abs(s - want) / want < 0.03);
    // Pure black and pure white stay put except through clamping.
    const GrayImage black(10, 10, 0);
    CHECK(add_speckle(black, var, 3) == black);
    CHECK_THROWS_AS(add_speckle(gray, -0.1, 1), ArgumentError);
}

TEST_CASE("noise is deterministic per record") {
    const auto repo = small_repo();
    const NoiseSpec spec{0.05, 0.04};
    const auto a = apply_noise(repo, spec, 12);
    CHECK(a == apply_noise(repo, spec, 12));
    CHECK(a != apply_noise(repo, spec, 13));
    CHECK(a.records().size() == repo.records().size());
    for (std::size_t i = 0; i < repo.size(); ++i) CHECK(a.record(i).word == repo.record(i).word);
}

TEST_CASE("split partitions every index") {
    for (std::size_t n : {1u, 7u, 10u, 101u}) {
        const auto s = split_dataset(n, kDefaultRatios, 4);
        CHECK(s.validate.size() == static_cast<std::size_t>(std::floor(n * 0.1)));
        CHECK(s.test.size() == static_cast<std::size_t>(std::floor(n * 0.1)));
        std::vector<std::size_t> all;
        for (const auto* part : {&s.train, &s.validate, &s.test}) all.insert(all.end(), part->begin(), part->end());
        std::sort(all.begin(), all.end());
        for (std::size_t i = 0; i < n; ++i) CHECK(all[i] == i);
        CHECK(split_dataset(n, kDefaultRatios, 4) == s);
    }
    CHECK_THROWS_AS(split_dataset(10, {0.5, 0.4, 0.3}, 1), ArgumentError);
}

TEST_CASE("split file round trip") {
    testing::TempDir dir("split");
    const auto s = split_dataset(37, kDefaultRatios, 2);
    write_split(dir / "split.tsv", s);
    CHECK(read_split(dir / "split.tsv") == s);
    CHECK(&split_part(s, "test") == &s.test);
    CHECK_THROWS_AS(split_part(s, "other"), ArgumentError);
}

TEST_CASE("resize matches a bilinear oracle and keeps the aspect ratio") {
    SplitMix64 rng(40);
    for (int trial = 0; trial < 10; ++trial) {
        const std::uint32_t w = 5 + static_cast<std::uint32_t>(rng.below(300)),
                            h = 5 + static_cast<std::uint32_t>(rng.below(80));
        GrayImage img(w, h);
        for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
        const auto canvas = resize_to_canvas(img);
        const double scale = std::min(128.0 / w, 32.0 / h);
        const auto nw = std::clamp<long>(std::lround(w * scale), 1, 128);
        const auto nh = std::clamp<long>(std::lround(h * scale), 1, 32);
        for (long x = 0; x < 128; ++x)
            for (long y = 0; y < 32; ++y) {
                const double got = canvas.at({static_cast<std::size_t>(x), static_cast<std::size_t>(y)});
                if (x >= nw || y >= nh) {
                    CHECK(got == 255.0);
                    continue;
                }
                const double sx = (x + 0.5) * w / static_cast<double>(nw) - 0.5;
                const double sy = (y + 0.5) * h / static_cast<double>(nh) - 0.5;
                CHECK(std::abs(got - oracle::bilinear(img.pixels, w, h, sx, sy)) < 1e-9);
            }
    }
}

TEST_CASE("preprocessing standardizes the canvas") {
    RendererConfig cfg;
    const auto t = preprocess_resize(render_word("مكتبة", 1, cfg));
    CHECK(t.shape() == Shape{128, 32});
    double m = 0.0, v = 0.0;
    for (double x : t.values()) m += x;
    m /= t.size();
    for (double x : t.values()) v += (x - m) * (x - m);
    v /= t.size();
    CHECK(std::abs(m) < 1e-12);
    CHECK(std::abs(v - 1.0) < 1e-9);
    CHECK_THROWS_AS(resize_to_canvas(GrayImage()), DimensionError);
}
