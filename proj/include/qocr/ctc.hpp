#pragma once

#include <cstddef>
#include <vector>

#include "qocr/tensor.hpp"

// Connectionist temporal classification over per-step logits [T][V+1], where
// the last column is the blank.
namespace qocr::ctc {

using LabelSequence = std::vector<std::size_t>;

struct CtcResult {
    double loss = 0.0;  // -log p(label | logits)
    Tensor grad_logits;  // d loss / d logits, [T][V+1]
};

// Fewest steps that can emit `label`: one per symbol plus a blank between each adjacent repeat.
std::size_t min_steps(const LabelSequence& label);
bool feasible(std::size_t steps, const LabelSequence& label);

// Log-space forward-backward. Throws InfeasibleLabelError if the label cannot
// be aligned in T steps, VocabularyError if it mentions the blank or an
// out-of-range index.
CtcResult ctc_loss(const Tensor& logits, const LabelSequence& label);

// Row-wise log-softmax of a [T][K] matrix.
Tensor log_softmax(const Tensor& logits);

// Per-step argmax; ties go to the lowest index.
std::vector<std::size_t> argmax_path(const Tensor& logits);

// Merge adjacent repeats, then drop blanks.
LabelSequence collapse(const std::vector<std::size_t>& path, std::size_t blank);

LabelSequence best_path_decode(const Tensor& logits);

}  // namespace qocr::ctc
