#include "qocr/metrics.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qocr/error.hpp"

namespace qocr::metrics {

std::size_t levenshtein(std::string_view a, std::string_view b) { return edit_distance(utf8_split(a), utf8_split(b)); }

double crr(const std::vector<TextPair>& pairs) { return make_report("", pairs, false).crr; }

double wrr(const std::vector<TextPair>& pairs) {
    if (pairs.empty()) throw ArgumentError("WRR of an empty corpus is undefined");
    std::size_t exact = 0;
    for (const auto& p : pairs)
        if (p.truth == p.prediction) ++exact;
    return static_cast<double>(exact) / static_cast<double>(pairs.size());
}

EvalReport make_report(const std::string& dataset, const std::vector<TextPair>& pairs, bool keep_samples) {
    EvalReport r;
    r.dataset = dataset;
    r.samples = pairs.size();
    for (const auto& p : pairs) {
        const std::size_t d = levenshtein(p.prediction, p.truth);
        r.total_chars += utf8_split(p.truth).size();
        r.total_distance += d;
        if (keep_samples) r.per_sample.push_back({p.truth, p.prediction, d});
    }
    if (r.total_chars == 0) throw ArgumentError("CRR needs at least one ground-truth character");
    r.crr_raw = 1.0 - static_cast<double>(r.total_distance) / static_cast<double>(r.total_chars);
    r.crr = std::max(0.0, r.crr_raw);
    r.wrr = wrr(pairs);
    return r;
}

EvalReport evaluate_prepared(const model::TrainingState& state, const model::PreparedSet& set,
                             const std::string& label) {
    const auto predictions = model::recognize_all(state, set.images);
    std::vector<TextPair> pairs;
    pairs.reserve(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) pairs.push_back({set.words[i], predictions[i]});
    return make_report(label, pairs, true);
}

EvalReport evaluate_dataset(const model::TrainingState& state, const dataset::Repository& repo,
                            const std::vector<std::size_t>& indices, const std::string& label) {
    for (auto i : indices)
        if (i >= repo.size())
            throw ArgumentError("record index " + std::to_string(i) + " out of range (repository has " +
                                std::to_string(repo.size()) + ")");
    return evaluate_prepared(state, model::prepare(state, repo, indices), label);
}

std::string csv_header() { return "dataset,samples,total_chars,total_distance,crr,wrr"; }

namespace {

std::string format_rate(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string q = "\"";
    for (char c : field) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

template <class T>
T field_as(const std::string& s, std::size_t line, const char* name) {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size())
        throw ParseError("report line " + std::to_string(line) + ": bad " + name + " '" + s + "'");
    return v;
}

}  // namespace

std::string to_csv_row(const EvalReport& r) {
    return quote(r.dataset) + "," + std::to_string(r.samples) + "," + std::to_string(r.total_chars) + "," +
           std::to_string(r.total_distance) + "," + format_rate(r.crr) + "," + format_rate(r.wrr);
}

std::vector<EvalReport> read_report_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != csv_header())
        throw ParseError("report line 1: expected header '" + csv_header() + "'");
    std::vector<EvalReport> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 6)
            throw ParseError("report line " + std::to_string(line_no) + ": expected 6 fields, got " +
                             std::to_string(f.size()));
        EvalReport r;
        r.dataset = f[0];
        r.samples = field_as<std::size_t>(f[1], line_no, "samples");
        r.total_chars = field_as<std::size_t>(f[2], line_no, "total_chars");
        r.total_distance = field_as<std::size_t>(f[3], line_no, "total_distance");
        r.crr = field_as<double>(f[4], line_no, "crr");
        r.wrr = field_as<double>(f[5], line_no, "wrr");
        if (r.crr < 0.0 || r.crr > 1.0 || r.wrr < 0.0 || r.wrr > 1.0)
            throw ParseError("report line " + std::to_string(line_no) + ": rates must lie in [0, 1]");
        r.crr_raw = r.total_chars ? 1.0 - static_cast<double>(r.total_distance) / static_cast<double>(r.total_chars)
                                  : r.crr;
        out.push_back(std::move(r));
    }
    return out;
}

void write_report_csv(const std::filesystem::path& path, const std::vector<EvalReport>& reports) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << csv_header() << '\n';
    for (const auto& r : reports) out << to_csv_row(r) << '\n';
}

void write_transcripts_csv(const std::filesystem::path& path, const EvalReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "truth,prediction,distance\n";
    for (const auto& s : report.per_sample)
        out << quote(s.truth) << ',' << quote(s.prediction) << ',' << s.distance << '\n';
}

}  // namespace qocr::metrics
