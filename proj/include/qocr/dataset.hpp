#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qocr/tensor.hpp"
#include "qocr/vocabulary.hpp"

namespace qocr::dataset {

// 8-bit grayscale raster, row-major (y outer), 0 = ink, 255 = background.
struct GrayImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(std::uint32_t w, std::uint32_t h, std::uint8_t fill = 255);
    GrayImage(std::uint32_t w, std::uint32_t h, std::vector<std::uint8_t> data);

    std::uint8_t& at(std::uint32_t x, std::uint32_t y) { return pixels[std::size_t{y} * width + x]; }
    std::uint8_t at(std::uint32_t x, std::uint32_t y) const { return pixels[std::size_t{y} * width + x]; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

// Binary PGM (P5) import/export for single images.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

// ------------------------------------------------------------------ repository

enum class Style { regular, bold };
std::string to_string(Style s);
Style parse_style(const std::string& s);

struct SampleRecord {
    std::string word;
    std::uint32_t font_id = 0;
    Style style = Style::bold;
    std::uint32_t size_pt = 26;
    std::uint64_t start_offset = 0;
    std::uint64_t byte_length = 0;

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct LabeledImage {
    std::string word;
    std::uint32_t font_id = 0;
    Style style = Style::bold;
    std::uint32_t size_pt = 26;
    GrayImage image;
};

// Payload: u32 LE width, u32 LE height, width*height raw bytes.
std::vector<std::uint8_t> encode_payload(const GrayImage& img);
GrayImage decode_payload(std::span<const std::uint8_t> bytes);

inline constexpr const char* kLabelsFile = "labels.tsv";
inline constexpr const char* kBlobFile = "images.bin";
inline constexpr const char* kVocabFile = "vocab.txt";

// All images live in one blob; the labels index addresses them by offset and length.
class Repository {
public:
    Repository() = default;
    Repository(std::vector<SampleRecord> records, std::vector<std::uint8_t> blob);

    // Packs images back to back, in order.
    static Repository pack(const std::vector<LabeledImage>& samples);

    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    const std::vector<SampleRecord>& records() const noexcept { return records_; }
    const SampleRecord& record(std::size_t i) const { return records_.at(i); }
    const std::vector<std::uint8_t>& blob() const noexcept { return blob_; }

    GrayImage image(std::size_t i) const;
    LabeledImage sample(std::size_t i) const;

    // Checks sequential packing, bounds, and that every payload parses.
    // Throws ParseError naming the 1-based labels-file line of the first bad record.
    void validate() const;

    friend bool operator==(const Repository&, const Repository&) = default;

private:
    std::vector<SampleRecord> records_;
    std::vector<std::uint8_t> blob_;
};

void write_repository(const Repository& repo, const std::filesystem::path& labels_path,
                      const std::filesystem::path& blob_path);
Repository read_repository(const std::filesystem::path& labels_path, const std::filesystem::path& blob_path);

// Directory convenience: <dir>/labels.tsv and <dir>/images.bin.
void write_repository(const Repository& repo, const std::filesystem::path& dir);
Repository read_repository(const std::filesystem::path& dir);

// -------------------------------------------------------------------- renderer

inline constexpr std::size_t kGlyphCols = 5;
inline constexpr std::size_t kGlyphRows = 7;
using GlyphMask = std::array<bool, kGlyphCols * kGlyphRows>;  // row-major, 7 rows of 5

struct RendererConfig {
    Vocabulary vocabulary = Vocabulary::arabic_default();
    std::uint64_t seed = 0;
    std::uint32_t size_pt = 26;  // glyph pixels per mask cell = max(1, size_pt / 13)
    Style style = Style::bold;   // bold adds one pixel of stroke
    std::uint32_t margin = 4;
    std::uint32_t glyph_gap = 2;
    std::uint32_t max_jitter = 2;  // per-font vertical jitter amplitude is drawn from [0, max_jitter]
    double max_shear = 0.3;
};

// Per-font perturbation drawn from the font's own seeded stream.
struct FontStyle {
    std::uint32_t stroke = 1;  // 1..3
    double shear = 0.0;        // [-max_shear, max_shear]
    std::uint32_t jitter = 0;
};

GlyphMask glyph_mask(std::size_t symbol_index, std::uint64_t seed);
FontStyle font_style(std::uint32_t font_id, const RendererConfig& cfg);

struct WordLayout {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    // [begin, end) column range of each glyph cell, in logical (reading) order.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> cells;
};

WordLayout layout_word(std::size_t symbol_count, std::uint32_t font_id, const RendererConfig& cfg);

// Draws the word right to left, one pseudo-glyph per symbol, with a baseline
// connector between neighbouring glyphs.
GrayImage render_word(const std::string& word, std::uint32_t font_id, const RendererConfig& cfg);

// `count` distinct words of min_len..max_len symbols drawn uniformly from the vocabulary.
// Throws ArgumentError if the length range cannot hold that many distinct words.
std::vector<std::string> random_words(const Vocabulary& vocab, std::size_t count, std::size_t min_len,
                                      std::size_t max_len, std::uint64_t seed);

// One record per (word, font) pair, word-major.
Repository generate_samples(const std::vector<std::string>& words, const std::vector<std::uint32_t>& fonts,
                            const RendererConfig& cfg);

// ----------------------------------------------------------------------- noise

GrayImage add_salt_pepper(const GrayImage& img, double density, std::uint64_t seed);
GrayImage add_speckle(const GrayImage& img, double variance, std::uint64_t seed);

struct NoiseSpec {
    double salt_pepper_density = 0.0;
    double speckle_variance = 0.0;
};

// Salt-and-pepper then speckle on every record; record i draws from the
// sub-stream derive_seed(seed, i), so the result does not depend on processing order.
Repository apply_noise(const Repository& repo, const NoiseSpec& spec, std::uint64_t seed);

// ----------------------------------------------------------------------- split

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validate;
    std::vector<std::size_t> test;

    friend bool operator==(const Split&, const Split&) = default;
};

using SplitRatios = std::array<double, 3>;
inline constexpr SplitRatios kDefaultRatios{0.8, 0.1, 0.1};

// Seeded Fisher-Yates shuffle, then contiguous cuts. Validate and test get
// floor(n * ratio); the remainder goes to train.
Split split_dataset(std::size_t record_count, const SplitRatios& ratios, std::uint64_t seed);
Split split_dataset(const Repository& repo, const SplitRatios& ratios, std::uint64_t seed);

// Text form: one "<set>\t<index>" line per record.
void write_split(const std::filesystem::path& path, const Split& split);
Split read_split(const std::filesystem::path& path);
const std::vector<std::size_t>& split_part(const Split& split, const std::string& name);

// ------------------------------------------------------------------ preprocess

inline constexpr std::size_t kCanvasWidth = 128;
inline constexpr std::size_t kCanvasHeight = 32;

// Aspect-preserving bilinear resize into a white canvas, left aligned.
// Returns gray levels in [0, 255] as a [width][height] tensor.
Tensor resize_to_canvas(const GrayImage& img, std::size_t canvas_w = kCanvasWidth,
                        std::size_t canvas_h = kCanvasHeight);

// resize_to_canvas, scaled to [0, 1], then standardized to zero mean and unit variance.
Tensor preprocess_resize(const GrayImage& img, std::size_t canvas_w = kCanvasWidth,
                         std::size_t canvas_h = kCanvasHeight);

}  // namespace qocr::dataset
