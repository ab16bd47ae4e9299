#include <cblas.h>

#include <algorithm>
#include <cstddef>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qocr/kernels.hpp"

namespace qocr::kernels::parallel {

int max_threads() noexcept {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, double alpha, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double beta, double* c, std::size_t ldc) {
    if (m == 0 || n == 0) return;
    if (k == 0) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) c[i * ldc + j] = beta == 0.0 ? 0.0 : beta * c[i * ldc + j];
        return;
    }
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans,
                static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), alpha, a, static_cast<int>(lda), b,
                static_cast<int>(ldb), beta, c, static_cast<int>(ldc));
}

void im2col(const ConvShape& s, const double* input, double* cols) {
    const std::size_t W = s.width, H = s.height, Ci = s.in_channels;
    const std::size_t kw = s.kernel_w, kh = s.kernel_h;
    const std::size_t row_len = kw * kh * Ci;
    const auto pad_w = static_cast<std::ptrdiff_t>((kw - 1) / 2);
    const auto pad_h = static_cast<std::ptrdiff_t>((kh - 1) / 2);
    const auto outer = static_cast<std::ptrdiff_t>(s.batch * W);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t nx = 0; nx < outer; ++nx) {
        const std::size_t n = static_cast<std::size_t>(nx) / W;
        const auto x = static_cast<std::ptrdiff_t>(static_cast<std::size_t>(nx) % W);
        const double* in = input + n * W * H * Ci;
        for (std::size_t y = 0; y < H; ++y) {
            double* row = cols + (static_cast<std::size_t>(nx) * H + y) * row_len;
            for (std::size_t dx = 0; dx < kw; ++dx) {
                const std::ptrdiff_t ix = x + static_cast<std::ptrdiff_t>(dx) - pad_w;
                double* seg = row + dx * kh * Ci;
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) {
                    std::fill(seg, seg + kh * Ci, 0.0);
                    continue;
                }
                // Taps along height are contiguous in memory for a fixed ix.
                const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(y) - pad_h;
                for (std::size_t dy = 0; dy < kh; ++dy) {
                    const std::ptrdiff_t iy = y0 + static_cast<std::ptrdiff_t>(dy);
                    double* dst = seg + dy * Ci;
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H))
                        std::fill(dst, dst + Ci, 0.0);
                    else
                        std::memcpy(dst, in + (static_cast<std::size_t>(ix) * H + static_cast<std::size_t>(iy)) * Ci,
                                    Ci * sizeof(double));
                }
            }
        }
    }
}

void col2im(const ConvShape& s, const double* cols, double* input_grad) {
    const std::size_t W = s.width, H = s.height, Ci = s.in_channels;
    const std::size_t kw = s.kernel_w, kh = s.kernel_h;
    const std::size_t row_len = kw * kh * Ci;
    const auto pad_w = static_cast<std::ptrdiff_t>((kw - 1) / 2);
    const auto pad_h = static_cast<std::ptrdiff_t>((kh - 1) / 2);
    const auto batch = static_cast<std::ptrdiff_t>(s.batch);

    // Windows overlap within a sample, so parallelism stops at the sample level.
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t n = 0; n < batch; ++n) {
        double* gin = input_grad + static_cast<std::size_t>(n) * W * H * Ci;
        std::fill(gin, gin + W * H * Ci, 0.0);
        for (std::size_t x = 0; x < W; ++x) {
            for (std::size_t y = 0; y < H; ++y) {
                const double* row = cols + ((static_cast<std::size_t>(n) * W + x) * H + y) * row_len;
                for (std::size_t dx = 0; dx < kw; ++dx) {
                    const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x + dx) - pad_w;
                    if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
                    for (std::size_t dy = 0; dy < kh; ++dy) {
                        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y + dy) - pad_h;
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
                        const double* src = row + (dx * kh + dy) * Ci;
                        double* dst = gin + (static_cast<std::size_t>(ix) * H + static_cast<std::size_t>(iy)) * Ci;
                        for (std::size_t ci = 0; ci < Ci; ++ci) dst[ci] += src[ci];
                    }
                }
            }
        }
    }
}

namespace {

std::vector<double>& scratch() {
    thread_local std::vector<double> buffer;
    return buffer;
}

double* scratch_of(std::size_t count) {
    auto& buf = scratch();
    if (buf.size() < count) buf.resize(count);
    return buf.data();
}

}  // namespace

void conv2d_forward(const ConvShape& s, const double* input, const double* kernels, const double* bias,
                    double* output) {
    const std::size_t rows = s.batch * s.width * s.height;
    const std::size_t row_len = s.kernel_w * s.kernel_h * s.in_channels;
    const std::size_t Co = s.out_channels;
    double* cols = scratch_of(rows * row_len);
    im2col(s, input, cols);

    const auto nrows = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < nrows; ++r) std::memcpy(output + static_cast<std::size_t>(r) * Co, bias, Co * sizeof(double));

    gemm(false, false, rows, Co, row_len, 1.0, cols, row_len, kernels, Co, 1.0, output, Co);
}

void conv2d_backward(const ConvShape& s, const double* input, const double* kernels, const double* upstream,
                     double* grad_input, double* grad_kernels, double* grad_bias) {
    const std::size_t rows = s.batch * s.width * s.height;
    const std::size_t row_len = s.kernel_w * s.kernel_h * s.in_channels;
    const std::size_t Co = s.out_channels;
    double* cols = scratch_of(rows * row_len);
    im2col(s, input, cols);

    gemm(true, false, row_len, Co, rows, 1.0, cols, row_len, upstream, Co, 0.0, grad_kernels, Co);

    std::fill(grad_bias, grad_bias + Co, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* up = upstream + r * Co;
        for (std::size_t co = 0; co < Co; ++co) grad_bias[co] += up[co];
    }

    if (grad_input) {
        // cols is no longer needed; reuse it for the column-space gradient.
        gemm(false, true, rows, row_len, Co, 1.0, upstream, Co, kernels, Co, 0.0, cols, row_len);
        col2im(s, cols, grad_input);
    }
}

}  // namespace qocr::kernels::parallel
