#include <algorithm>
#include <cstddef>

#include "qocr/kernels.hpp"

namespace qocr::kernels::reference {

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, double alpha, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double beta, double* c, std::size_t ldc) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                const double av = trans_a ? a[p * lda + i] : a[i * lda + p];
                const double bv = trans_b ? b[j * ldb + p] : b[p * ldb + j];
                acc += av * bv;
            }
            double& out = c[i * ldc + j];
            out = (beta == 0.0 ? 0.0 : beta * out) + alpha * acc;
        }
    }
}

namespace {

// Input coordinate covered by kernel tap `d` at output position `o`, or -1 when it falls in the padding.
inline std::ptrdiff_t tap(std::size_t o, std::size_t d, std::size_t k, std::size_t extent) {
    const auto pos = static_cast<std::ptrdiff_t>(o + d) - static_cast<std::ptrdiff_t>((k - 1) / 2);
    return (pos < 0 || pos >= static_cast<std::ptrdiff_t>(extent)) ? -1 : pos;
}

}  // namespace

void conv2d_forward(const ConvShape& s, const double* input, const double* kernels, const double* bias,
                    double* output) {
    const std::size_t W = s.width, H = s.height, Ci = s.in_channels, Co = s.out_channels;
    for (std::size_t n = 0; n < s.batch; ++n) {
        const double* in = input + n * W * H * Ci;
        double* out = output + n * W * H * Co;
        for (std::size_t x = 0; x < W; ++x)
            for (std::size_t y = 0; y < H; ++y)
                for (std::size_t co = 0; co < Co; ++co) {
                    double acc = bias[co];
                    for (std::size_t dx = 0; dx < s.kernel_w; ++dx) {
                        const auto ix = tap(x, dx, s.kernel_w, W);
                        if (ix < 0) continue;
                        for (std::size_t dy = 0; dy < s.kernel_h; ++dy) {
                            const auto iy = tap(y, dy, s.kernel_h, H);
                            if (iy < 0) continue;
                            for (std::size_t ci = 0; ci < Ci; ++ci)
                                acc += in[(static_cast<std::size_t>(ix) * H + static_cast<std::size_t>(iy)) * Ci + ci] *
                                       kernels[((dx * s.kernel_h + dy) * Ci + ci) * Co + co];
                        }
                    }
                    out[(x * H + y) * Co + co] = acc;
                }
    }
}

void conv2d_backward(const ConvShape& s, const double* input, const double* kernels, const double* upstream,
                     double* grad_input, double* grad_kernels, double* grad_bias) {
    const std::size_t W = s.width, H = s.height, Ci = s.in_channels, Co = s.out_channels;
    std::fill(grad_kernels, grad_kernels + s.kernel_w * s.kernel_h * Ci * Co, 0.0);
    std::fill(grad_bias, grad_bias + Co, 0.0);
    if (grad_input) std::fill(grad_input, grad_input + s.batch * W * H * Ci, 0.0);

    for (std::size_t n = 0; n < s.batch; ++n) {
        const double* in = input + n * W * H * Ci;
        const double* up = upstream + n * W * H * Co;
        double* gin = grad_input ? grad_input + n * W * H * Ci : nullptr;
        for (std::size_t x = 0; x < W; ++x)
            for (std::size_t y = 0; y < H; ++y)
                for (std::size_t co = 0; co < Co; ++co) {
                    const double g = up[(x * H + y) * Co + co];
                    grad_bias[co] += g;
                    for (std::size_t dx = 0; dx < s.kernel_w; ++dx) {
                        const auto ix = tap(x, dx, s.kernel_w, W);
                        if (ix < 0) continue;
                        for (std::size_t dy = 0; dy < s.kernel_h; ++dy) {
                            const auto iy = tap(y, dy, s.kernel_h, H);
                            if (iy < 0) continue;
                            const std::size_t in_base =
                                (static_cast<std::size_t>(ix) * H + static_cast<std::size_t>(iy)) * Ci;
                            const std::size_t k_base = (dx * s.kernel_h + dy) * Ci;
                            for (std::size_t ci = 0; ci < Ci; ++ci) {
                                grad_kernels[(k_base + ci) * Co + co] += g * in[in_base + ci];
                                if (gin) gin[in_base + ci] += g * kernels[(k_base + ci) * Co + co];
                            }
                        }
                    }
                }
    }
}

}  // namespace qocr::kernels::reference
