#include <algorithm>
#include <cmath>

#include "qocr/dataset.hpp"
#include "qocr/error.hpp"
#include "qocr/rng.hpp"

namespace qocr::dataset {

GrayImage add_salt_pepper(const GrayImage& img, double density, std::uint64_t seed) {
    if (!(density >= 0.0 && density <= 1.0))
        throw ArgumentError("salt-and-pepper density must lie in [0, 1], got " + std::to_string(density));
    GrayImage out = img;
    SplitMix64 rng(seed);
    const double half = density / 2.0;
    for (auto& p : out.pixels) {
        const double u = rng.uniform();
        if (u < half)
            p = 0;
        else if (u < density)
            p = 255;
    }
    return out;
}

GrayImage add_speckle(const GrayImage& img, double variance, std::uint64_t seed) {
    if (!(variance >= 0.0)) throw ArgumentError("speckle variance must be non-negative, got " + std::to_string(variance));
    if (variance == 0.0) return img;
    GrayImage out = img;
    SplitMix64 rng(seed);
    const double sigma = std::sqrt(variance);
    for (auto& p : out.pixels) {
        const double n = sigma * rng.normal();
        const double v = std::round(static_cast<double>(p) * (1.0 + n));
        p = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
    return out;
}

Repository apply_noise(const Repository& repo, const NoiseSpec& spec, std::uint64_t seed) {
    if (!(spec.salt_pepper_density >= 0.0 && spec.salt_pepper_density <= 1.0))
        throw ArgumentError("salt-and-pepper density must lie in [0, 1]");
    if (!(spec.speckle_variance >= 0.0)) throw ArgumentError("speckle variance must be non-negative");
    std::vector<LabeledImage> samples(repo.size());
    const auto n = static_cast<std::ptrdiff_t>(repo.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const std::uint64_t record_seed = derive_seed(seed, i);
        auto s = repo.sample(i);
        if (spec.salt_pepper_density > 0.0)
            s.image = add_salt_pepper(s.image, spec.salt_pepper_density, derive_seed(record_seed, 0));
        if (spec.speckle_variance > 0.0)
            s.image = add_speckle(s.image, spec.speckle_variance, derive_seed(record_seed, 1));
        samples[i] = std::move(s);
    }
    return Repository::pack(samples);
}

}  // namespace qocr::dataset
