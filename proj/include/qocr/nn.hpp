#pragma once

#include <cstddef>
#include <vector>

#include "qocr/rng.hpp"
#include "qocr/tensor.hpp"

// Layers of the recognizer, each with an explicit backward pass.
//
// Activation layout is [N][W][H][C] (rank 4) or [W][H][C] (rank 3, one image):
// width is the slowest spatial axis so that the final feature map reads as a
// sequence along the writing direction. Sequences are [N][T][D] or [T][D].

namespace qocr::nn {

enum class Mode { train, infer };

// ---------------------------------------------------------------- convolution

// kernels: [kw][kh][Cin][Cout]; bias: [Cout].
struct ConvParams {
    Tensor kernels;
    Tensor bias;

    std::size_t kernel_w() const { return kernels.dim(0); }
    std::size_t kernel_h() const { return kernels.dim(1); }
    std::size_t in_channels() const { return kernels.dim(2); }
    std::size_t out_channels() const { return kernels.dim(3); }
};

struct ConvGrads {
    Tensor input;  // empty when not requested
    Tensor kernels;
    Tensor bias;
};

// Same-size convolution with zero padding (k-1)/2; kernel extents must be odd.
Tensor conv2d_forward(const Tensor& input, const ConvParams& p);
ConvGrads conv2d_backward(const Tensor& input, const ConvParams& p, const Tensor& upstream,
                          bool need_input_grad = true);

// ---------------------------------------------------------- batch normalization

struct BatchNormParams {
    Tensor gamma;
    Tensor beta;
    Tensor running_mean;
    Tensor running_var;
    double momentum = 0.9;  // weight kept by the running statistics per update
    double epsilon = 1e-5;

    std::size_t channels() const { return gamma.size(); }
};

struct BatchNormCache {
    Mode mode = Mode::infer;
    Shape shape;
    Tensor normalized;  // x-hat, same shape as the input
    std::vector<double> mean;
    std::vector<double> variance;  // biased batch variance (train) or running variance (infer)
    std::vector<double> inv_std;
};

struct BatchNormResult {
    Tensor output;
    BatchNormCache cache;
};

struct BatchNormGrads {
    Tensor input;
    Tensor gamma;
    Tensor beta;
};

// Statistics are per channel (last axis) over all other axes. Train mode uses
// the batch statistics and leaves `p` untouched; call update_running_stats to
// fold them into the running estimates.
BatchNormResult batchnorm_forward(const Tensor& input, const BatchNormParams& p, Mode mode);
BatchNormGrads batchnorm_backward(const BatchNormCache& cache, const BatchNormParams& p, const Tensor& upstream);
// running <- momentum * running + (1 - momentum) * batch, with the unbiased batch variance.
void update_running_stats(BatchNormParams& p, const BatchNormCache& cache);

// ------------------------------------------------------------------------ relu

Tensor relu(const Tensor& input);
// Passes upstream where input > 0; the subgradient at exactly 0 is 0.
Tensor relu_backward(const Tensor& input, const Tensor& upstream);

// --------------------------------------------------------------- max pooling

// Window along (width, height); stride equals the window.
struct PoolWindow {
    std::size_t along_width = 1;
    std::size_t along_height = 1;
};

struct MaxPoolResult {
    Tensor output;
    // Flat input offset of the winner for each output element; ties go to the first scanned.
    std::vector<std::size_t> argmax;
};

MaxPoolResult maxpool_forward(const Tensor& input, PoolWindow window);
Tensor maxpool_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax, const Tensor& upstream);

// ------------------------------------------------------------------------ lstm

// Gate rows are stacked in the order input, forget, cell candidate, output.
struct LstmParams {
    Tensor input_weights;      // [4H][D]
    Tensor recurrent_weights;  // [4H][H]
    Tensor bias;               // [4H]

    std::size_t hidden() const { return recurrent_weights.dim(1); }
    std::size_t input_size() const { return input_weights.dim(1); }
};

enum class Direction { forward, backward };

struct LstmCache {
    Direction direction = Direction::forward;
    bool batched = false;
    std::size_t batch = 0, steps = 0, input_size = 0, hidden = 0;
    // All buffers below are in processing order (time-reversed for Direction::backward), [N][T][*].
    std::vector<double> input;
    std::vector<double> gates;  // post-activation i, f, g, o
    std::vector<double> cell;
    std::vector<double> cell_tanh;
    std::vector<double> hidden_states;
};

struct LstmResult {
    Tensor output;
    LstmCache cache;
};

struct LstmGrads {
    Tensor input;
    Tensor input_weights;
    Tensor recurrent_weights;
    Tensor bias;
};

// h0 = c0 = 0. The backward direction consumes the reversed sequence and
// re-reverses its outputs, so output step t always aligns with input step t.
LstmResult lstm_forward(const Tensor& seq, const LstmParams& p, Direction direction);
LstmGrads lstm_backward(const LstmCache& cache, const LstmParams& p, const Tensor& upstream);

struct BiLstmParams {
    LstmParams forward;
    LstmParams backward;
};

struct BiLstmResult {
    Tensor output;  // [.., T, 2H]: forward features then backward features
    LstmCache forward_cache;
    LstmCache backward_cache;
};

struct BiLstmGrads {
    Tensor input;
    LstmGrads forward;
    LstmGrads backward;
};

BiLstmResult bidirectional_lstm(const Tensor& seq, const BiLstmParams& p);
BiLstmGrads bidirectional_lstm_backward(const BiLstmResult& result, const BiLstmParams& p, const Tensor& upstream);

// ------------------------------------------------------------------ projection

struct DenseParams {
    Tensor weight;  // [out][in]
    Tensor bias;    // [out]
};

struct DenseGrads {
    Tensor input;
    Tensor weight;
    Tensor bias;
};

// Affine map applied independently at every step of a [.., T, in] sequence.
Tensor project(const Tensor& seq, const DenseParams& p);
DenseGrads project_backward(const Tensor& seq, const DenseParams& p, const Tensor& upstream);

// -------------------------------------------------------------- initialization

// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases 0; LSTM forget-gate bias 1.
ConvParams init_conv(std::size_t kernel_w, std::size_t kernel_h, std::size_t in_channels, std::size_t out_channels,
                     SplitMix64& rng);
BatchNormParams init_batchnorm(std::size_t channels);
LstmParams init_lstm(std::size_t input_size, std::size_t hidden, SplitMix64& rng);
DenseParams init_dense(std::size_t input_size, std::size_t output_size, SplitMix64& rng);

}  // namespace qocr::nn
