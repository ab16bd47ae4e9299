#include <bit>
#include <cmath>
#include <set>

#include "qocr/dataset.hpp"
#include "qocr/error.hpp"
#include "qocr/rng.hpp"

namespace qocr::dataset {

namespace {

// Stream tags so glyph, font, and jitter draws never share a sub-stream.
constexpr std::uint64_t kGlyphStream = 0x676C797068ULL;
constexpr std::uint64_t kFontStream = 0x666F6E74ULL;
constexpr std::uint64_t kJitterStream = 0x6A6974ULL;

std::uint32_t glyph_scale(const RendererConfig& cfg) { return std::max<std::uint32_t>(1, cfg.size_pt / 13); }

std::uint32_t stroke_of(const FontStyle& f, const RendererConfig& cfg) {
    return f.stroke + (cfg.style == Style::bold ? 1 : 0);
}

struct Geometry {
    std::uint32_t scale, glyph_w, glyph_h, stroke, slack, lead, cell_w, baseline;
};

Geometry geometry(const FontStyle& f, const RendererConfig& cfg) {
    Geometry g{};
    g.scale = glyph_scale(cfg);
    g.glyph_w = static_cast<std::uint32_t>(kGlyphCols) * g.scale;
    g.glyph_h = static_cast<std::uint32_t>(kGlyphRows) * g.scale;
    g.stroke = stroke_of(f, cfg);
    // Sheared rows may move by up to |shear| times their distance from the baseline,
    // which jitter can stretch to glyph_h + jitter above and jitter below.
    const double lean = std::abs(f.shear);
    g.slack = static_cast<std::uint32_t>(std::ceil(lean * (g.glyph_h + 2 * f.jitter)));
    g.lead = static_cast<std::uint32_t>(std::ceil(lean * (f.shear < 0 ? g.glyph_h + f.jitter : f.jitter)));
    g.cell_w = g.glyph_w + (g.stroke - 1) + cfg.glyph_gap + g.slack;
    g.baseline = cfg.margin + f.jitter + g.glyph_h - 1;
    return g;
}

}  // namespace

GlyphMask glyph_mask(std::size_t symbol_index, std::uint64_t seed) {
    SplitMix64 rng(derive_seed(seed ^ kGlyphStream, symbol_index));
    // Redraw until the glyph carries a moderate amount of ink; still a function of (index, seed) only.
    std::uint64_t bits = 0;
    for (;;) {
        bits = rng.next() & ((std::uint64_t{1} << (kGlyphCols * kGlyphRows)) - 1);
        const int ink = std::popcount(bits);
        if (ink >= 10 && ink <= 24) break;
    }
    GlyphMask mask{};
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = (bits >> i) & 1U;
    return mask;
}

FontStyle font_style(std::uint32_t font_id, const RendererConfig& cfg) {
    SplitMix64 rng(derive_seed(cfg.seed ^ kFontStream, font_id));
    FontStyle f;
    f.stroke = 1 + static_cast<std::uint32_t>(rng.below(3));
    f.shear = rng.uniform(-cfg.max_shear, cfg.max_shear);
    f.jitter = static_cast<std::uint32_t>(rng.below(std::uint64_t{cfg.max_jitter} + 1));
    return f;
}

WordLayout layout_word(std::size_t symbol_count, std::uint32_t font_id, const RendererConfig& cfg) {
    if (symbol_count == 0) throw ArgumentError("cannot lay out an empty word");
    const auto f = font_style(font_id, cfg);
    const auto g = geometry(f, cfg);
    WordLayout l;
    l.width = 2 * cfg.margin + static_cast<std::uint32_t>(symbol_count) * g.cell_w;
    l.height = 2 * cfg.margin + g.glyph_h + (g.stroke - 1) + 2 * f.jitter;
    for (std::size_t i = 0; i < symbol_count; ++i) {
        const auto right = l.width - cfg.margin - static_cast<std::uint32_t>(i) * g.cell_w;
        l.cells.emplace_back(right - g.cell_w, right);
    }
    return l;
}

GrayImage render_word(const std::string& word, std::uint32_t font_id, const RendererConfig& cfg) {
    if (word.empty()) throw ArgumentError("cannot render an empty word");
    const auto symbols = cfg.vocabulary.encode(word);
    const auto font = font_style(font_id, cfg);
    const auto g = geometry(font, cfg);
    const auto layout = layout_word(symbols.size(), font_id, cfg);
    GrayImage img(layout.width, layout.height, 255);

    auto ink = [&](long x, long y) {
        for (std::uint32_t sx = 0; sx < g.stroke; ++sx)
            for (std::uint32_t sy = 0; sy < g.stroke; ++sy) {
                const long px = x + sx, py = y + sy;
                if (px >= 0 && py >= 0 && px < static_cast<long>(img.width) && py < static_cast<long>(img.height))
                    img.at(static_cast<std::uint32_t>(px), static_cast<std::uint32_t>(py)) = 0;
            }
    };

    const std::uint64_t jitter_seed = derive_seed(cfg.seed ^ kJitterStream, font_id);
    std::vector<long> ink_left(symbols.size()), ink_right(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        const auto mask = glyph_mask(symbols[i], cfg.seed);
        SplitMix64 jrng(derive_seed(jitter_seed, (i << 16) ^ symbols[i]));
        const long dy = font.jitter ? static_cast<long>(jrng.below(2 * std::uint64_t{font.jitter} + 1)) -
                                          static_cast<long>(font.jitter)
                                    : 0;
        const long ox = static_cast<long>(layout.cells[i].first + cfg.glyph_gap / 2 + g.lead);
        const long oy = static_cast<long>(cfg.margin + font.jitter) + dy;
        ink_left[i] = ox;
        ink_right[i] = ox + static_cast<long>(g.glyph_w + g.stroke - 1);
        for (std::size_t r = 0; r < kGlyphRows; ++r)
            for (std::size_t c = 0; c < kGlyphCols; ++c) {
                if (!mask[r * kGlyphCols + c]) continue;
                for (std::uint32_t py = 0; py < g.scale; ++py) {
                    const long y = oy + static_cast<long>(r * g.scale + py);
                    // Shear leans rows above the baseline sideways.
                    const long shift = std::lround(font.shear * static_cast<double>(static_cast<long>(g.baseline) - y));
                    for (std::uint32_t px = 0; px < g.scale; ++px) ink(ox + static_cast<long>(c * g.scale + px) + shift, y);
                }
            }
    }

    // Baseline connector across the gap between each glyph and the next one to its left.
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i)
        for (long x = ink_right[i + 1]; x <= ink_left[i]; ++x)
            if (x >= 0 && x < static_cast<long>(img.width)) img.at(static_cast<std::uint32_t>(x), g.baseline) = 0;
    return img;
}

std::vector<std::string> random_words(const Vocabulary& vocab, std::size_t count, std::size_t min_len,
                                      std::size_t max_len, std::uint64_t seed) {
    if (vocab.size() == 0 || min_len == 0 || min_len > max_len)
        throw ArgumentError("word lengths must satisfy 1 <= min <= max with a non-empty vocabulary");
    double capacity = 0.0;
    for (std::size_t len = min_len; len <= max_len && capacity < 1e18; ++len)
        capacity += std::pow(static_cast<double>(vocab.size()), static_cast<double>(len));
    if (static_cast<double>(count) > capacity)
        throw ArgumentError("cannot draw " + std::to_string(count) + " distinct words of " + std::to_string(min_len) +
                            ".." + std::to_string(max_len) + " symbols");
    SplitMix64 rng(seed);
    std::set<std::string> seen;
    std::vector<std::string> words;
    while (words.size() < count) {
        const std::size_t len = min_len + rng.below(max_len - min_len + 1);
        std::string w;
        for (std::size_t i = 0; i < len; ++i) w += vocab.symbol(rng.below(vocab.size()));
        if (seen.insert(w).second) words.push_back(std::move(w));
    }
    return words;
}

Repository generate_samples(const std::vector<std::string>& words, const std::vector<std::uint32_t>& fonts,
                            const RendererConfig& cfg) {
    for (const auto& w : words) {
        if (w.empty()) throw ArgumentError("word list contains an empty word");
        cfg.vocabulary.encode(w);  // fail before rendering anything
    }
    std::vector<LabeledImage> samples(words.size() * fonts.size());
    const auto total = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t k = 0; k < total; ++k) {
        const std::size_t wi = static_cast<std::size_t>(k) / fonts.size();
        const std::size_t fi = static_cast<std::size_t>(k) % fonts.size();
        auto& s = samples[static_cast<std::size_t>(k)];
        s.word = words[wi];
        s.font_id = fonts[fi];
        s.style = cfg.style;
        s.size_pt = cfg.size_pt;
        s.image = render_word(words[wi], fonts[fi], cfg);
    }
    return Repository::pack(samples);
}

}  // namespace qocr::dataset
