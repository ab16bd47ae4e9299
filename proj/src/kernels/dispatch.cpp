#include <atomic>

#include "qocr/kernels.hpp"

namespace qocr::kernels {

namespace {
std::atomic<Backend> g_backend{Backend::parallel};
}

void set_backend(Backend b) noexcept { g_backend.store(b, std::memory_order_relaxed); }
Backend backend() noexcept { return g_backend.load(std::memory_order_relaxed); }

const char* backend_name(Backend b) noexcept {
    return b == Backend::reference ? "reference" : "parallel";
}

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, double alpha, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double beta, double* c, std::size_t ldc) {
    if (backend() == Backend::reference)
        reference::gemm(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
    else
        parallel::gemm(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

void conv2d_forward(const ConvShape& s, const double* input, const double* kernels, const double* bias,
                    double* output) {
    if (backend() == Backend::reference)
        reference::conv2d_forward(s, input, kernels, bias, output);
    else
        parallel::conv2d_forward(s, input, kernels, bias, output);
}

void conv2d_backward(const ConvShape& s, const double* input, const double* kernels, const double* upstream,
                     double* grad_input, double* grad_kernels, double* grad_bias) {
    if (backend() == Backend::reference)
        reference::conv2d_backward(s, input, kernels, upstream, grad_input, grad_kernels, grad_bias);
    else
        parallel::conv2d_backward(s, input, kernels, upstream, grad_input, grad_kernels, grad_bias);
}

}  // namespace qocr::kernels
