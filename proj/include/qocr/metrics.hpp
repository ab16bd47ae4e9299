#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qocr/dataset.hpp"
#include "qocr/model.hpp"

namespace qocr::metrics {

// Unit-cost insert/delete/substitute distance between two symbol sequences.
template <class Seq>
std::size_t edit_distance(const Seq& a, const Seq& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// Levenshtein distance over UTF-8 code points.
std::size_t levenshtein(std::string_view a, std::string_view b);

struct TextPair {
    std::string truth;
    std::string prediction;
};

// 1 - (sum of distances) / (sum of ground-truth lengths), clamped at 0.
// Throws ArgumentError when the ground truth holds no characters.
double crr(const std::vector<TextPair>& pairs);
// Fraction of exact matches. Throws ArgumentError on an empty list.
double wrr(const std::vector<TextPair>& pairs);

struct SampleResult {
    std::string truth;
    std::string prediction;
    std::size_t distance = 0;
};

struct EvalReport {
    std::string dataset;
    std::size_t samples = 0;
    std::size_t total_chars = 0;
    std::size_t total_distance = 0;
    double crr = 0.0;
    double crr_raw = 0.0;  // unclamped complement; negative when distances exceed the reference length
    double wrr = 0.0;
    std::vector<SampleResult> per_sample;
};

EvalReport make_report(const std::string& dataset, const std::vector<TextPair>& pairs, bool keep_samples = true);

// Recognizes every listed record and aggregates CRR/WRR.
EvalReport evaluate_dataset(const model::TrainingState& state, const dataset::Repository& repo,
                            const std::vector<std::size_t>& indices, const std::string& label = "dataset");
EvalReport evaluate_prepared(const model::TrainingState& state, const model::PreparedSet& set,
                             const std::string& label = "dataset");

// CSV row schema: dataset,samples,total_chars,total_distance,crr,wrr
std::string csv_header();
std::string to_csv_row(const EvalReport& r);
// Reads every report row of a CSV file (header required). Throws ParseError with the line number.
std::vector<EvalReport> read_report_csv(const std::filesystem::path& path);
void write_report_csv(const std::filesystem::path& path, const std::vector<EvalReport>& reports);
// Per-sample transcript: truth,prediction,distance with minimal quoting.
void write_transcripts_csv(const std::filesystem::path& path, const EvalReport& report);

}  // namespace qocr::metrics
