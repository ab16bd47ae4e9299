#include <cstddef>

#include "qocr/error.hpp"
#include "qocr/nn.hpp"

namespace qocr::nn {

Tensor relu(const Tensor& input) {
    Tensor out(input.shape());
    const double* x = input.data();
    double* y = out.data();
    const auto n = static_cast<std::ptrdiff_t>(input.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
    return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& upstream) {
    if (input.shape() != upstream.shape())
        throw DimensionError("relu upstream gradient " + shape_string(upstream.shape()) + " does not match input " +
                             shape_string(input.shape()));
    Tensor out(input.shape());
    const double* x = input.data();
    const double* up = upstream.data();
    double* g = out.data();
    const auto n = static_cast<std::ptrdiff_t>(input.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) g[i] = x[i] > 0.0 ? up[i] : 0.0;
    return out;
}

MaxPoolResult maxpool_forward(const Tensor& input, PoolWindow window) {
    if (input.rank() != 3 && input.rank() != 4)
        throw DimensionError("maxpool input must be [W,H,C] or [N,W,H,C], got " + shape_string(input.shape()));
    if (window.along_width == 0 || window.along_height == 0) throw DimensionError("maxpool window must be positive");
    const std::size_t off = input.rank() == 4 ? 1 : 0;
    const std::size_t N = off ? input.dim(0) : 1;
    const std::size_t W = input.dim(off), H = input.dim(off + 1), C = input.dim(off + 2);
    const std::size_t wx = window.along_width, wy = window.along_height;
    if (W % wx != 0 || H % wy != 0)
        throw DimensionError("maxpool window (" + std::to_string(wx) + "," + std::to_string(wy) +
                             ") does not divide input " + shape_string(input.shape()));
    const std::size_t OW = W / wx, OH = H / wy;

    Shape out_shape = input.shape();
    out_shape[off] = OW;
    out_shape[off + 1] = OH;
    MaxPoolResult r{Tensor(out_shape), std::vector<std::size_t>(shape_size(out_shape))};
    const double* x = input.data();
    double* y = r.output.data();

    const auto batch = static_cast<std::ptrdiff_t>(N);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t nn = 0; nn < batch; ++nn) {
        const auto n = static_cast<std::size_t>(nn);
        for (std::size_t ox = 0; ox < OW; ++ox)
            for (std::size_t oy = 0; oy < OH; ++oy)
                for (std::size_t c = 0; c < C; ++c) {
                    std::size_t best = ((n * W + ox * wx) * H + oy * wy) * C + c;
                    for (std::size_t dx = 0; dx < wx; ++dx)
                        for (std::size_t dy = 0; dy < wy; ++dy) {
                            const std::size_t i = ((n * W + ox * wx + dx) * H + oy * wy + dy) * C + c;
                            if (x[i] > x[best]) best = i;
                        }
                    const std::size_t o = ((n * OW + ox) * OH + oy) * C + c;
                    y[o] = x[best];
                    r.argmax[o] = best;
                }
    }
    return r;
}

Tensor maxpool_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax, const Tensor& upstream) {
    if (argmax.size() != upstream.size())
        throw DimensionError("maxpool upstream gradient " + shape_string(upstream.shape()) +
                             " does not match recorded argmax count " + std::to_string(argmax.size()));
    Tensor g(input_shape);
    // Windows do not overlap (stride == window), so every input gets at most one contribution.
    for (std::size_t o = 0; o < argmax.size(); ++o) g[argmax[o]] += upstream[o];
    return g;
}

}  // namespace qocr::nn
