#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "qocr/rng.hpp"
#include "qocr/tensor.hpp"

namespace testing {

inline qocr::Tensor random_tensor(const qocr::Shape& shape, qocr::SplitMix64& rng, double lo = -1.0, double hi = 1.0) {
    qocr::Tensor t(shape);
    for (auto& v : t.values()) v = rng.uniform(lo, hi);
    return t;
}

inline double dot(const qocr::Tensor& a, const qocr::Tensor& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Relative error with a floor so that gradients near zero compare absolutely.
inline double rel_err(double analytic, double numeric, double floor = 1e-6) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Central difference of loss() with respect to x, restoring x afterwards.
template <class F>
double central_diff(double& x, F&& loss, double h = 1e-5) {
    const double saved = x;
    x = saved + h;
    const double up = loss();
    x = saved - h;
    const double down = loss();
    x = saved;
    return (up - down) / (2.0 * h);
}

// Worst relative error over every element of `param` (or a strided subset).
template <class F>
double worst_error(qocr::Tensor& param, const qocr::Tensor& analytic, F&& loss, std::size_t max_checks = 64) {
    double worst = 0.0;
    const std::size_t stride = std::max<std::size_t>(1, param.size() / max_checks);
    for (std::size_t i = 0; i < param.size(); i += stride)
        worst = std::max(worst, rel_err(analytic[i], central_diff(param[i], loss)));
    return worst;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("qocr_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(++counter));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace testing
