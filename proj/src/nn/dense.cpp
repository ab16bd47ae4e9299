#include <cmath>

#include "qocr/error.hpp"
#include "qocr/kernels.hpp"
#include "qocr/nn.hpp"

namespace qocr::nn {

namespace {

void check_dense(const Tensor& seq, const DenseParams& p) {
    if (p.weight.rank() != 2 || p.bias.rank() != 1 || p.bias.dim(0) != p.weight.dim(0))
        throw DimensionError("projection parameters malformed: weight " + shape_string(p.weight.shape()) +
                             ", bias " + shape_string(p.bias.shape()));
    if (seq.rank() < 1 || seq.shape().back() != p.weight.dim(1))
        throw DimensionError("projection input " + shape_string(seq.shape()) + " does not match weight " +
                             shape_string(p.weight.shape()));
}

}  // namespace

Tensor project(const Tensor& seq, const DenseParams& p) {
    check_dense(seq, p);
    const std::size_t in = p.weight.dim(1), out = p.weight.dim(0);
    const std::size_t rows = seq.size() / in;
    Shape out_shape = seq.shape();
    out_shape.back() = out;
    Tensor y(out_shape);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < out; ++j) y[r * out + j] = p.bias[j];
    kernels::gemm(false, true, rows, out, in, 1.0, seq.data(), in, p.weight.data(), in, 1.0, y.data(), out);
    return y;
}

DenseGrads project_backward(const Tensor& seq, const DenseParams& p, const Tensor& upstream) {
    check_dense(seq, p);
    const std::size_t in = p.weight.dim(1), out = p.weight.dim(0);
    const std::size_t rows = seq.size() / in;
    Shape out_shape = seq.shape();
    out_shape.back() = out;
    if (upstream.shape() != out_shape)
        throw DimensionError("projection upstream gradient " + shape_string(upstream.shape()) +
                             " does not match output " + shape_string(out_shape));

    DenseGrads g{Tensor(seq.shape()), Tensor(p.weight.shape()), Tensor(p.bias.shape())};
    kernels::gemm(false, false, rows, in, out, 1.0, upstream.data(), out, p.weight.data(), in, 0.0, g.input.data(),
                  in);
    kernels::gemm(true, false, out, in, rows, 1.0, upstream.data(), out, seq.data(), in, 0.0, g.weight.data(), in);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < out; ++j) g.bias[j] += upstream[r * out + j];
    return g;
}

namespace {

Tensor uniform_tensor(Shape shape, std::size_t fan_in, SplitMix64& rng) {
    Tensor t(std::move(shape));
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : t.values()) v = rng.uniform(-bound, bound);
    return t;
}

}  // namespace

ConvParams init_conv(std::size_t kernel_w, std::size_t kernel_h, std::size_t in_channels, std::size_t out_channels,
                     SplitMix64& rng) {
    return {uniform_tensor({kernel_w, kernel_h, in_channels, out_channels}, kernel_w * kernel_h * in_channels, rng),
            Tensor({out_channels})};
}

BatchNormParams init_batchnorm(std::size_t channels) {
    BatchNormParams p;
    p.gamma = Tensor({channels}, 1.0);
    p.beta = Tensor({channels});
    p.running_mean = Tensor({channels});
    p.running_var = Tensor({channels}, 1.0);
    return p;
}

LstmParams init_lstm(std::size_t input_size, std::size_t hidden, SplitMix64& rng) {
    LstmParams p;
    p.input_weights = uniform_tensor({4 * hidden, input_size}, input_size, rng);
    p.recurrent_weights = uniform_tensor({4 * hidden, hidden}, hidden, rng);
    p.bias = Tensor({4 * hidden});
    for (std::size_t j = hidden; j < 2 * hidden; ++j) p.bias[j] = 1.0;
    return p;
}

DenseParams init_dense(std::size_t input_size, std::size_t output_size, SplitMix64& rng) {
    return {uniform_tensor({output_size, input_size}, input_size, rng), Tensor({output_size})};
}

}  // namespace qocr::nn
