#include "qocr/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qocr/error.hpp"

namespace qocr::ctc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void check_logits(const Tensor& logits) {
    if (logits.rank() != 2 || logits.dim(1) < 1)
        throw DimensionError("ctc expects logits [T, V+1], got " + shape_string(logits.shape()));
}

}  // namespace

std::size_t min_steps(const LabelSequence& label) {
    std::size_t repeats = 0;
    for (std::size_t i = 1; i < label.size(); ++i)
        if (label[i] == label[i - 1]) ++repeats;
    return label.size() + repeats;
}

bool feasible(std::size_t steps, const LabelSequence& label) { return steps >= min_steps(label); }

Tensor log_softmax(const Tensor& logits) {
    check_logits(logits);
    const std::size_t T = logits.dim(0), K = logits.dim(1);
    Tensor out(logits.shape());
    for (std::size_t t = 0; t < T; ++t) {
        const double* row = logits.data() + t * K;
        const double hi = *std::max_element(row, row + K);
        double s = 0.0;
        for (std::size_t k = 0; k < K; ++k) s += std::exp(row[k] - hi);
        const double lse = hi + std::log(s);
        for (std::size_t k = 0; k < K; ++k) out[t * K + k] = row[k] - lse;
    }
    return out;
}

CtcResult ctc_loss(const Tensor& logits, const LabelSequence& label) {
    check_logits(logits);
    const std::size_t T = logits.dim(0), K = logits.dim(1);
    const std::size_t blank = K - 1;
    for (auto s : label)
        if (s >= blank)
            throw VocabularyError("label index " + std::to_string(s) + " is the blank or beyond it (blank = " +
                                  std::to_string(blank) + ")");
    if (!feasible(T, label))
        throw InfeasibleLabelError("label of length " + std::to_string(label.size()) + " needs at least " +
                                   std::to_string(min_steps(label)) + " steps, logits have " + std::to_string(T));

    const Tensor lp = log_softmax(logits);
    const std::size_t L = label.size();
    const std::size_t S = 2 * L + 1;
    std::vector<std::size_t> ext(S, blank);
    for (std::size_t i = 0; i < L; ++i) ext[2 * i + 1] = label[i];
    // Transition s-2 -> s is allowed only into a symbol that differs from the previous symbol.
    std::vector<char> skip(S, 0);
    for (std::size_t s = 2; s < S; ++s) skip[s] = ext[s] != blank && ext[s] != ext[s - 2];

    auto emit = [&](std::size_t t, std::size_t s) { return lp[t * K + ext[s]]; };

    std::vector<double> alpha(T * S, kNegInf), beta(T * S, kNegInf);
    alpha[0] = emit(0, 0);
    if (S > 1) alpha[1] = emit(0, 1);
    for (std::size_t t = 1; t < T; ++t) {
        const double* prev = alpha.data() + (t - 1) * S;
        double* cur = alpha.data() + t * S;
        for (std::size_t s = 0; s < S; ++s) {
            double acc = prev[s];
            if (s >= 1) acc = log_add(acc, prev[s - 1]);
            if (skip[s]) acc = log_add(acc, prev[s - 2]);
            cur[s] = acc == kNegInf ? kNegInf : acc + emit(t, s);
        }
    }

    beta[(T - 1) * S + S - 1] = emit(T - 1, S - 1);
    if (S > 1) beta[(T - 1) * S + S - 2] = emit(T - 1, S - 2);
    for (std::size_t t = T - 1; t-- > 0;) {
        const double* next = beta.data() + (t + 1) * S;
        double* cur = beta.data() + t * S;
        for (std::size_t s = 0; s < S; ++s) {
            double acc = next[s];
            if (s + 1 < S) acc = log_add(acc, next[s + 1]);
            if (s + 2 < S && skip[s + 2]) acc = log_add(acc, next[s + 2]);
            cur[s] = acc == kNegInf ? kNegInf : acc + emit(t, s);
        }
    }

    const double* last = alpha.data() + (T - 1) * S;
    const double log_p = S > 1 ? log_add(last[S - 1], last[S - 2]) : last[0];

    CtcResult r;
    r.loss = -log_p;
    r.grad_logits = Tensor(logits.shape());
    std::vector<double> occupancy(K);
    for (std::size_t t = 0; t < T; ++t) {
        std::fill(occupancy.begin(), occupancy.end(), kNegInf);
        for (std::size_t s = 0; s < S; ++s) {
            const double a = alpha[t * S + s], b = beta[t * S + s];
            if (a == kNegInf || b == kNegInf) continue;
            occupancy[ext[s]] = log_add(occupancy[ext[s]], a + b - emit(t, s));
        }
        for (std::size_t k = 0; k < K; ++k) {
            const double posterior = occupancy[k] == kNegInf ? 0.0 : std::exp(occupancy[k] - log_p);
            r.grad_logits[t * K + k] = std::exp(lp[t * K + k]) - posterior;
        }
    }
    return r;
}

std::vector<std::size_t> argmax_path(const Tensor& logits) {
    check_logits(logits);
    const std::size_t T = logits.dim(0), K = logits.dim(1);
    std::vector<std::size_t> path(T);
    for (std::size_t t = 0; t < T; ++t) {
        const double* row = logits.data() + t * K;
        path[t] = static_cast<std::size_t>(std::max_element(row, row + K) - row);
    }
    return path;
}

LabelSequence collapse(const std::vector<std::size_t>& path, std::size_t blank) {
    LabelSequence out;
    for (std::size_t t = 0; t < path.size(); ++t) {
        if (t > 0 && path[t] == path[t - 1]) continue;
        if (path[t] != blank) out.push_back(path[t]);
    }
    return out;
}

LabelSequence best_path_decode(const Tensor& logits) {
    return collapse(argmax_path(logits), logits.dim(1) - 1);
}

}  // namespace qocr::ctc
