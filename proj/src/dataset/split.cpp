#include <cmath>
#include <fstream>
#include <numeric>

#include "qocr/dataset.hpp"
#include "qocr/error.hpp"
#include "qocr/rng.hpp"

namespace qocr::dataset {

Split split_dataset(std::size_t record_count, const SplitRatios& ratios, std::uint64_t seed) {
    if (record_count == 0) throw ArgumentError("cannot split an empty repository");
    for (double r : ratios)
        if (!(r > 0.0)) throw ArgumentError("split ratios must be positive");
    if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) throw ArgumentError("split ratios must sum to 1");

    std::vector<std::size_t> order(record_count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(seed);
    for (std::size_t i = record_count - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

    const auto n = static_cast<double>(record_count);
    const auto n_val = static_cast<std::size_t>(std::floor(n * ratios[1]));
    const auto n_test = static_cast<std::size_t>(std::floor(n * ratios[2]));
    const std::size_t n_train = record_count - n_val - n_test;

    Split s;
    s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.validate.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                      order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
    return s;
}

Split split_dataset(const Repository& repo, const SplitRatios& ratios, std::uint64_t seed) {
    return split_dataset(repo.size(), ratios, seed);
}

void write_split(const std::filesystem::path& path, const Split& split) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (auto i : split.train) out << "train\t" << i << '\n';
    for (auto i : split.validate) out << "validate\t" << i << '\n';
    for (auto i : split.test) out << "test\t" << i << '\n';
}

Split read_split(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    Split s;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError("split line " + std::to_string(line_no) + ": missing tab");
        const std::string set = line.substr(0, tab);
        std::size_t idx = 0;
        try {
            std::size_t used = 0;
            idx = std::stoull(line.substr(tab + 1), &used);
            if (used != line.size() - tab - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError("split line " + std::to_string(line_no) + ": bad index");
        }
        if (set == "train")
            s.train.push_back(idx);
        else if (set == "validate")
            s.validate.push_back(idx);
        else if (set == "test")
            s.test.push_back(idx);
        else
            throw ParseError("split line " + std::to_string(line_no) + ": unknown set '" + set + "'");
    }
    return s;
}

const std::vector<std::size_t>& split_part(const Split& split, const std::string& name) {
    if (name == "train") return split.train;
    if (name == "validate") return split.validate;
    if (name == "test") return split.test;
    throw ArgumentError("unknown split '" + name + "' (expected train, validate, or test)");
}

}  // namespace qocr::dataset
