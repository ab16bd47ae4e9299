#include "qocr/error.hpp"
#include "qocr/kernels.hpp"
#include "qocr/nn.hpp"

namespace qocr::nn {

namespace {

kernels::ConvShape conv_shape(const Tensor& input, const ConvParams& p) {
    if (p.kernels.rank() != 4 || p.bias.rank() != 1 || p.bias.dim(0) != p.kernels.dim(3))
        throw DimensionError("conv parameters malformed: kernels " + shape_string(p.kernels.shape()) + ", bias " +
                             shape_string(p.bias.shape()));
    if (p.kernel_w() % 2 == 0 || p.kernel_h() % 2 == 0)
        throw DimensionError("conv kernel extents must be odd, got " + shape_string(p.kernels.shape()));
    if (input.rank() != 3 && input.rank() != 4)
        throw DimensionError("conv input must be [W,H,C] or [N,W,H,C], got " + shape_string(input.shape()));
    const std::size_t off = input.rank() == 4 ? 1 : 0;
    kernels::ConvShape s;
    s.batch = off ? input.dim(0) : 1;
    s.width = input.dim(off);
    s.height = input.dim(off + 1);
    s.in_channels = input.dim(off + 2);
    s.out_channels = p.out_channels();
    s.kernel_w = p.kernel_w();
    s.kernel_h = p.kernel_h();
    if (s.in_channels != p.in_channels())
        throw DimensionError("conv channel mismatch: input " + shape_string(input.shape()) + " vs kernels " +
                             shape_string(p.kernels.shape()));
    return s;
}

Shape with_channels(const Shape& in, std::size_t channels) {
    Shape out = in;
    out.back() = channels;
    return out;
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const ConvParams& p) {
    const auto s = conv_shape(input, p);
    Tensor out(with_channels(input.shape(), s.out_channels));
    kernels::conv2d_forward(s, input.data(), p.kernels.data(), p.bias.data(), out.data());
    return out;
}

ConvGrads conv2d_backward(const Tensor& input, const ConvParams& p, const Tensor& upstream, bool need_input_grad) {
    const auto s = conv_shape(input, p);
    if (upstream.shape() != with_channels(input.shape(), s.out_channels))
        throw DimensionError("conv upstream gradient " + shape_string(upstream.shape()) +
                             " does not match forward output " +
                             shape_string(with_channels(input.shape(), s.out_channels)));
    ConvGrads g{need_input_grad ? Tensor(input.shape()) : Tensor(), Tensor(p.kernels.shape()), Tensor(p.bias.shape())};
    kernels::conv2d_backward(s, input.data(), p.kernels.data(), upstream.data(),
                             need_input_grad ? g.input.data() : nullptr, g.kernels.data(), g.bias.data());
    return g;
}

}  // namespace qocr::nn
