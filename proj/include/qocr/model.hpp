#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qocr/ctc.hpp"
#include "qocr/dataset.hpp"
#include "qocr/nn.hpp"
#include "qocr/tensor.hpp"
#include "qocr/vocabulary.hpp"

namespace qocr::model {

struct ConvLayerSpec {
    std::size_t kernel = 3;   // square, odd
    std::size_t filters = 1;
    nn::PoolWindow pool{1, 1};

    friend bool operator==(const ConvLayerSpec& a, const ConvLayerSpec& b) {
        return a.kernel == b.kernel && a.filters == b.filters && a.pool.along_width == b.pool.along_width &&
               a.pool.along_height == b.pool.along_height;
    }
};

struct ModelConfig {
    std::string name = "paper";
    std::size_t input_width = dataset::kCanvasWidth;
    std::size_t input_height = dataset::kCanvasHeight;
    std::vector<ConvLayerSpec> conv;
    std::size_t lstm_hidden = 256;
    std::size_t lstm_layers = 2;
    std::size_t vocab_size = 38;
    // Glyphs run right to left in the image while time steps run left to right,
    // so labels are reversed on the way into CTC and back out of decoding.
    bool right_to_left = true;
    double bn_momentum = 0.9;
    double bn_epsilon = 1e-5;

    // Five conv blocks (5x5x32, 5x5x64, 3x3x128, 3x3x128, 3x3x256), two 256-unit BiLSTM layers.
    static ModelConfig paper(std::size_t vocab_size = 38);
    // Half the filters and 64 hidden units; same input and time resolution.
    static ModelConfig toy(std::size_t vocab_size = 38);
    // "paper" or "toy"; throws ConfigError otherwise.
    static ModelConfig preset(const std::string& name, std::size_t vocab_size = 38);

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct FeatureShape {
    std::size_t width = 0, height = 0, channels = 0;
    friend bool operator==(const FeatureShape&, const FeatureShape&) = default;
};

// Output extents of each conv block. Throws ConfigError naming the first
// offending layer; the "paper" preset must also reproduce its fixed chain.
std::vector<FeatureShape> conv_shape_chain(const ModelConfig& cfg);
void validate_config(const ModelConfig& cfg);

inline std::size_t time_steps(const ModelConfig& cfg) { return conv_shape_chain(cfg).back().width; }

struct ConvBlockParams {
    nn::ConvParams conv;
    nn::BatchNormParams norm;
};

// Named view of one tensor inside ModelParams. Buffers (batch-norm running
// statistics) are persisted but never trained.
template <class T>
struct NamedTensor {
    std::string name;
    T* tensor;
    bool trainable;
};

struct ModelParams {
    std::vector<ConvBlockParams> blocks;
    std::vector<nn::BiLstmParams> recurrent;
    nn::DenseParams projection;

    // Stable order; checkpoint sections and optimizer state follow it.
    std::vector<NamedTensor<Tensor>> tensors();
    std::vector<NamedTensor<const Tensor>> tensors() const;
    std::vector<NamedTensor<Tensor>> trainable();
    std::vector<NamedTensor<const Tensor>> trainable() const;
};

struct Hyperparameters {
    double learning_rate = 0.001;
    double rho = 0.9;
    double epsilon = 1e-8;
    std::size_t batch_size = 32;

    friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

struct TrainingState {
    ModelConfig config;
    Vocabulary vocabulary;
    ModelParams params;
    std::vector<Tensor> accumulators;  // RMSProp mean squares, one per trainable tensor
    std::uint64_t iteration = 0;
    std::uint64_t seed = 0;
    Hyperparameters hyper;
};

// Deterministic in `seed`. The vocabulary size overrides cfg.vocab_size.
TrainingState build_model(ModelConfig cfg, const Vocabulary& vocabulary, std::uint64_t seed,
                          Hyperparameters hyper = {});

// ------------------------------------------------------------------- forward

struct BlockTrace {
    Tensor input;
    Tensor conv_out;
    nn::BatchNormCache norm;
    Tensor norm_out;
    Tensor relu_out;
    std::vector<std::size_t> pool_argmax;
    Tensor pool_out;
};

struct ForwardTrace {
    std::vector<BlockTrace> blocks;
    Tensor sequence;  // [N][T][features] after dropping the unit height axis
    std::vector<Tensor> recurrent_inputs;
    std::vector<nn::BiLstmResult> recurrent;
    Tensor logits;  // [N][T][V+1]
};

// images: [N][W][H] preprocessed canvases.
ForwardTrace forward_trace(const ModelConfig& cfg, const ModelParams& params, const Tensor& images, nn::Mode mode);
Tensor forward(const TrainingState& state, const Tensor& images, nn::Mode mode);

// Parameter gradients (same layout as ModelParams; buffers left empty) for upstream dL/dlogits.
ModelParams backward(const ModelConfig& cfg, const ModelParams& params, const ForwardTrace& trace,
                     const Tensor& grad_logits);

// ------------------------------------------------------------------ training

struct Batch {
    Tensor images;  // [N][W][H]
    std::vector<ctc::LabelSequence> labels;
    std::vector<std::size_t> record_ids;  // for error messages; may be empty
};

// Label order as seen along the time axis.
ctc::LabelSequence encode_label(const TrainingState& state, const std::string& word);
std::string decode_label(const TrainingState& state, const ctc::LabelSequence& label);

struct LossResult {
    double mean_loss = 0.0;
    ModelParams grads;
    ForwardTrace trace;
};

// Mean CTC loss over the batch in train mode and its full gradient.
LossResult loss_and_gradients(const ModelConfig& cfg, const ModelParams& params, const Batch& batch);

// RMSProp: s <- rho*s + (1-rho)*g^2; theta <- theta - lr*g/(sqrt(s)+eps).
void apply_rmsprop(TrainingState& state, const ModelParams& grads);

struct StepResult {
    double mean_loss = 0.0;
};

// One optimizer step: forward (train mode), CTC, backward, running-stat update, RMSProp.
StepResult train_step(TrainingState& state, const Batch& batch);

// Preprocessed images and labels for a subset of a repository.
struct PreparedSet {
    std::vector<std::size_t> record_ids;
    std::vector<Tensor> images;  // [W][H] each
    std::vector<std::string> words;
    std::vector<ctc::LabelSequence> labels;
};

PreparedSet prepare(const TrainingState& state, const dataset::Repository& repo,
                    const std::vector<std::size_t>& indices);
Batch make_batch(const PreparedSet& set, const std::vector<std::size_t>& positions);

// Position of the batch for global iteration `iteration`: epochs reshuffle with
// derive_seed(seed, epoch), so the order is a pure function of the counter.
std::vector<std::size_t> batch_positions(std::size_t set_size, std::size_t batch_size, std::uint64_t seed,
                                         std::uint64_t iteration);

struct EpochReport {
    std::uint64_t epoch = 0;
    std::uint64_t iteration = 0;
    double mean_loss = 0.0;
    double crr = 0.0;
    double wrr = 0.0;
};

struct Schedule {
    std::uint64_t iterations = 1000;  // train until state.iteration reaches this
    std::uint64_t eval_every = 0;     // iterations between evaluations; 0 = once per epoch
    // Called after every optimizer step with the new iteration count and the batch loss.
    std::function<void(std::uint64_t, double)> on_step;
    // Called after each evaluation with the report and current state.
    std::function<void(const EpochReport&, const TrainingState&)> on_report;
    // Called when validation CRR improves.
    std::function<void(const TrainingState&)> on_best;
    // Return true to stop after this evaluation.
    std::function<bool(const EpochReport&)> stop_when;
};

struct TrainResult {
    std::vector<EpochReport> reports;
    std::optional<TrainingState> best;
    double best_crr = -1.0;
};

// Trains on split.train, evaluates on split.validate at each report point.
TrainResult train(TrainingState& state, const dataset::Repository& repo, const dataset::Split& split,
                  const Schedule& schedule);

// ----------------------------------------------------------------- inference

std::string recognize(const TrainingState& state, const dataset::GrayImage& img);
std::vector<std::string> recognize_all(const TrainingState& state, const std::vector<Tensor>& preprocessed);

struct Activations {
    std::vector<Tensor> blocks;  // [W][H][C] output of each conv block
    Tensor sequence;             // [T][features]
    Tensor logits;               // [T][V+1]
    std::vector<std::size_t> argmax;
};

Activations inspect_activations(const TrainingState& state, const dataset::GrayImage& img);

// ---------------------------------------------------------------- checkpoint

inline constexpr std::uint16_t kCheckpointVersion = 1;

void save_checkpoint(const TrainingState& state, const std::filesystem::path& path);
TrainingState load_checkpoint(const std::filesystem::path& path);

}  // namespace qocr::model
