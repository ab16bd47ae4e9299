#include <algorithm>
#include <cmath>

#include "qocr/dataset.hpp"
#include "qocr/error.hpp"

namespace qocr::dataset {

Tensor resize_to_canvas(const GrayImage& img, std::size_t canvas_w, std::size_t canvas_h) {
    if (img.width == 0 || img.height == 0 || img.pixels.size() != std::size_t{img.width} * img.height)
        throw DimensionError("cannot resize a degenerate image " + std::to_string(img.width) + "x" +
                             std::to_string(img.height));
    const double sw = static_cast<double>(img.width), sh = static_cast<double>(img.height);
    const double scale = std::min(static_cast<double>(canvas_w) / sw, static_cast<double>(canvas_h) / sh);
    const auto fit = [](double v, std::size_t limit) {
        return std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(v)), 1, limit);
    };
    const std::size_t new_w = fit(sw * scale, canvas_w);
    const std::size_t new_h = fit(sh * scale, canvas_h);

    Tensor canvas({canvas_w, canvas_h}, 255.0);
    // Half-pixel-centre mapping: destination pixel centres land on source coordinates.
    const double rx = sw / static_cast<double>(new_w), ry = sh / static_cast<double>(new_h);
    for (std::size_t x = 0; x < new_w; ++x) {
        const double fx = std::clamp((static_cast<double>(x) + 0.5) * rx - 0.5, 0.0, sw - 1.0);
        const auto x0 = static_cast<std::uint32_t>(fx);
        const std::uint32_t x1 = std::min(x0 + 1, img.width - 1);
        const double ax = fx - x0;
        for (std::size_t y = 0; y < new_h; ++y) {
            const double fy = std::clamp((static_cast<double>(y) + 0.5) * ry - 0.5, 0.0, sh - 1.0);
            const auto y0 = static_cast<std::uint32_t>(fy);
            const std::uint32_t y1 = std::min(y0 + 1, img.height - 1);
            const double ay = fy - y0;
            const double top = (1.0 - ax) * img.at(x0, y0) + ax * img.at(x1, y0);
            const double bottom = (1.0 - ax) * img.at(x0, y1) + ax * img.at(x1, y1);
            canvas[x * canvas_h + y] = (1.0 - ay) * top + ay * bottom;
        }
    }
    return canvas;
}

Tensor preprocess_resize(const GrayImage& img, std::size_t canvas_w, std::size_t canvas_h) {
    Tensor t = resize_to_canvas(img, canvas_w, canvas_h);
    double mean = 0.0;
    for (auto& v : t.values()) {
        v /= 255.0;
        mean += v;
    }
    mean /= static_cast<double>(t.size());
    double var = 0.0;
    for (double v : t.values()) var += (v - mean) * (v - mean);
    var /= static_cast<double>(t.size());
    const double inv = 1.0 / std::sqrt(var + 1e-12);
    for (auto& v : t.values()) v = (v - mean) * inv;
    return t;
}

}  // namespace qocr::dataset
