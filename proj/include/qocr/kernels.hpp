#pragma once

#include <cstddef>

// Numeric hot loops, in two interchangeable backends:
//   reference  straightforward serial loops, kept as the ground truth for tests
//   parallel   im2col + BLAS GEMM with OpenMP over samples and channels
// The top-level functions dispatch on the process-wide backend selection.

namespace qocr::kernels {

enum class Backend { reference, parallel };

void set_backend(Backend b) noexcept;
Backend backend() noexcept;
const char* backend_name(Backend b) noexcept;

// Restores the previous backend on scope exit.
class ScopedBackend {
public:
    explicit ScopedBackend(Backend b) noexcept : previous_(backend()) { set_backend(b); }
    ~ScopedBackend() { set_backend(previous_); }
    ScopedBackend(const ScopedBackend&) = delete;
    ScopedBackend& operator=(const ScopedBackend&) = delete;

private:
    Backend previous_;
};

// Batched "same" convolution over [N][W][H][C] activations with kernels laid
// out [kw][kh][Cin][Cout]. Zero padding of (k-1)/2 on each side, unit stride.
struct ConvShape {
    std::size_t batch = 1;
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel_w = 0;
    std::size_t kernel_h = 0;
};

// Row-major C = alpha * op(A) * op(B) + beta * C, op(X) = X or X^T.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, double alpha, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double beta, double* c, std::size_t ldc);

void conv2d_forward(const ConvShape& s, const double* input, const double* kernels, const double* bias,
                    double* output);

// grad_input may be null when the caller does not need it (first layer).
// grad_kernels and grad_bias are overwritten, not accumulated.
void conv2d_backward(const ConvShape& s, const double* input, const double* kernels, const double* upstream,
                     double* grad_input, double* grad_kernels, double* grad_bias);

namespace reference {
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, double alpha, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double beta, double* c, std::size_t ldc);
void conv2d_forward(const ConvShape& s, const double* input, const double* kernels, const double* bias,
                    double* output);
void conv2d_backward(const ConvShape& s, const double* input, const double* kernels, const double* upstream,
                     double* grad_input, double* grad_kernels, double* grad_bias);
}  // namespace reference

namespace parallel {
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, double alpha, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double beta, double* c, std::size_t ldc);
void conv2d_forward(const ConvShape& s, const double* input, const double* kernels, const double* bias,
                    double* output);
void conv2d_backward(const ConvShape& s, const double* input, const double* kernels, const double* upstream,
                     double* grad_input, double* grad_kernels, double* grad_bias);

// Unfolds every receptive field into a row of length kw*kh*Cin, ordered (dx, dy, ci).
// `cols` holds batch*width*height rows.
void im2col(const ConvShape& s, const double* input, double* cols);
// Adjoint of im2col: scatters rows back, overwriting `input_grad`.
void col2im(const ConvShape& s, const double* cols, double* input_grad);

int max_threads() noexcept;
}  // namespace parallel

}  // namespace qocr::kernels
