#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary. Nothing here calls into the code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qocr/tensor.hpp"

namespace oracle {

using Label = std::vector<std::size_t>;

inline Label collapse_path(const std::vector<std::size_t>& path, std::size_t blank) {
    Label out;
    std::size_t prev = blank + 1;
    for (auto k : path) {
        if (k != prev && k != blank) out.push_back(k);
        prev = k;
    }
    return out;
}

// Probability of every label reachable from [T][K] logits (blank = K-1),
// summed over all K^T frame paths.
inline std::map<Label, double> enumerate_paths(const qocr::Tensor& logits) {
    const std::size_t T = logits.dim(0), K = logits.dim(1);
    std::vector<double> prob(T * K);
    for (std::size_t t = 0; t < T; ++t) {
        double z = 0.0;
        for (std::size_t k = 0; k < K; ++k) z += std::exp(logits[t * K + k]);
        for (std::size_t k = 0; k < K; ++k) prob[t * K + k] = std::exp(logits[t * K + k]) / z;
    }
    std::map<Label, double> out;
    std::vector<std::size_t> path(T, 0);
    while (true) {
        double p = 1.0;
        for (std::size_t t = 0; t < T; ++t) p *= prob[t * K + path[t]];
        out[collapse_path(path, K - 1)] += p;
        std::size_t t = 0;
        while (t < T && ++path[t] == K) path[t++] = 0;
        if (t == T) break;
    }
    return out;
}

// Every sequence over {0..V-1} with length <= max_len, shortest first.
inline std::vector<Label> all_labels(std::size_t V, std::size_t max_len) {
    std::vector<Label> out{{}};
    std::vector<Label> frontier{{}};
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<Label> next;
        for (const auto& l : frontier)
            for (std::size_t v = 0; v < V; ++v) {
                auto e = l;
                e.push_back(v);
                next.push_back(e);
            }
        out.insert(out.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return out;
}

// Plain recursive edit distance; exponential, fine for short strings.
inline std::size_t edit_distance_recursive(const std::vector<std::string>& a, std::size_t i,
                                           const std::vector<std::string>& b, std::size_t j) {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    if (a[i] == b[j]) return edit_distance_recursive(a, i + 1, b, j + 1);
    const auto del = edit_distance_recursive(a, i + 1, b, j);
    const auto ins = edit_distance_recursive(a, i, b, j + 1);
    const auto sub = edit_distance_recursive(a, i + 1, b, j + 1);
    return 1 + std::min({del, ins, sub});
}

// Wagner-Fischer with a full table, written out separately from the library's rolling version.
inline std::size_t edit_distance_table(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
    return d[a.size()][b.size()];
}

// Code points of a UTF-8 string, decoded by lead-byte length.
inline std::vector<std::string> code_points(const std::string& s) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < s.size();) {
        const auto c = static_cast<unsigned char>(s[i]);
        const std::size_t n = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
        out.push_back(s.substr(i, n));
        i += n;
    }
    return out;
}

// Bilinear sample at continuous (x, y) with clamped borders, pixels row-major.
inline double bilinear(const std::vector<std::uint8_t>& px, std::size_t w, std::size_t h, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(w - 1));
    y = std::clamp(y, 0.0, static_cast<double>(h - 1));
    const auto x0 = static_cast<std::size_t>(std::floor(x)), y0 = static_cast<std::size_t>(std::floor(y));
    const std::size_t x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
    const double fx = x - x0, fy = y - y0;
    auto at = [&](std::size_t xx, std::size_t yy) { return static_cast<double>(px[yy * w + xx]); };
    return (1 - fx) * (1 - fy) * at(x0, y0) + fx * (1 - fy) * at(x1, y0) + (1 - fx) * fy * at(x0, y1) +
           fx * fy * at(x1, y1);
}

}  // namespace oracle
