#include <vector>

#include "doctest.h"
#include "qocr/kernels.hpp"
#include "support.hpp"

using namespace qocr;
namespace k = qocr::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, SplitMix64& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

k::ConvShape random_shape(SplitMix64& rng) {
    k::ConvShape s;
    s.batch = 1 + rng.below(3);
    s.width = 1 + rng.below(9);
    s.height = 1 + rng.below(6);
    s.in_channels = 1 + rng.below(4);
    s.out_channels = 1 + rng.below(5);
    s.kernel_w = 1 + 2 * rng.below(3);
    s.kernel_h = 1 + 2 * rng.below(3);
    return s;
}

std::size_t in_size(const k::ConvShape& s) { return s.batch * s.width * s.height * s.in_channels; }
std::size_t out_size(const k::ConvShape& s) { return s.batch * s.width * s.height * s.out_channels; }
std::size_t kernel_size(const k::ConvShape& s) { return s.kernel_w * s.kernel_h * s.in_channels * s.out_channels; }

// Textbook definition, written independently of both backends.
std::vector<double> conv_oracle(const k::ConvShape& s, const std::vector<double>& x, const std::vector<double>& w,
                                const std::vector<double>& b) {
    std::vector<double> y(out_size(s));
    const long pw = static_cast<long>(s.kernel_w / 2), ph = static_cast<long>(s.kernel_h / 2);
    for (std::size_t n = 0; n < s.batch; ++n)
        for (long i = 0; i < static_cast<long>(s.width); ++i)
            for (long j = 0; j < static_cast<long>(s.height); ++j)
                for (std::size_t co = 0; co < s.out_channels; ++co) {
                    double acc = b[co];
                    for (long u = 0; u < static_cast<long>(s.kernel_w); ++u)
                        for (long v = 0; v < static_cast<long>(s.kernel_h); ++v) {
                            const long xi = i + u - pw, yj = j + v - ph;
                            if (xi < 0 || yj < 0 || xi >= static_cast<long>(s.width) || yj >= static_cast<long>(s.height))
                                continue;
                            for (std::size_t ci = 0; ci < s.in_channels; ++ci) {
                                const double xv = x[((n * s.width + xi) * s.height + yj) * s.in_channels + ci];
                                const double wv = w[((u * s.kernel_h + v) * s.in_channels + ci) * s.out_channels + co];
                                acc += xv * wv;
                            }
                        }
                    y[((n * s.width + i) * s.height + j) * s.out_channels + co] = acc;
                }
    return y;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(testing::rel_err(a[i], b[i], 1e-9) < tol);
}

}  // namespace

TEST_CASE("conv forward: both backends match the direct definition") {
    SplitMix64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const auto s = random_shape(rng);
        const auto x = random_vec(in_size(s), rng), w = random_vec(kernel_size(s), rng),
                   b = random_vec(s.out_channels, rng);
        const auto want = conv_oracle(s, x, w, b);
        std::vector<double> ref(out_size(s)), par(out_size(s));
        k::reference::conv2d_forward(s, x.data(), w.data(), b.data(), ref.data());
        k::parallel::conv2d_forward(s, x.data(), w.data(), b.data(), par.data());
        check_close(ref, want, 1e-12);
        check_close(par, want, 1e-12);
    }
}

TEST_CASE("conv backward: backends agree and satisfy the adjoint identity") {
    SplitMix64 rng(22);
    for (int trial = 0; trial < 30; ++trial) {
        const auto s = random_shape(rng);
        const auto x = random_vec(in_size(s), rng), w = random_vec(kernel_size(s), rng),
                   up = random_vec(out_size(s), rng);
        std::vector<double> gx_r(in_size(s)), gw_r(kernel_size(s)), gb_r(s.out_channels);
        std::vector<double> gx_p(in_size(s)), gw_p(kernel_size(s)), gb_p(s.out_channels);
        k::reference::conv2d_backward(s, x.data(), w.data(), up.data(), gx_r.data(), gw_r.data(), gb_r.data());
        k::parallel::conv2d_backward(s, x.data(), w.data(), up.data(), gx_p.data(), gw_p.data(), gb_p.data());
        check_close(gx_p, gx_r, 1e-10);
        check_close(gw_p, gw_r, 1e-10);
        check_close(gb_p, gb_r, 1e-10);

        // conv is linear in x (with zero bias): <conv(x), up> == <x, grad_x>.
        const std::vector<double> zero(s.out_channels, 0.0);
        const auto y = conv_oracle(s, x, w, zero);
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) lhs += y[i] * up[i];
        for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * gx_r[i];
        CHECK(testing::rel_err(lhs, rhs, 1e-9) < 1e-10);
        double wdot = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) wdot += w[i] * gw_r[i];
        CHECK(testing::rel_err(lhs, wdot, 1e-9) < 1e-10);
    }
}

TEST_CASE("conv backward without input gradient leaves the weight gradients intact") {
    SplitMix64 rng(23);
    const auto s = random_shape(rng);
    const auto x = random_vec(in_size(s), rng), w = random_vec(kernel_size(s), rng), up = random_vec(out_size(s), rng);
    std::vector<double> gx(in_size(s)), gw1(kernel_size(s)), gb1(s.out_channels), gw2(kernel_size(s)),
        gb2(s.out_channels);
    k::parallel::conv2d_backward(s, x.data(), w.data(), up.data(), gx.data(), gw1.data(), gb1.data());
    k::parallel::conv2d_backward(s, x.data(), w.data(), up.data(), nullptr, gw2.data(), gb2.data());
    CHECK(gw1 == gw2);
    CHECK(gb1 == gb2);
}

TEST_CASE("col2im is the adjoint of im2col") {
    SplitMix64 rng(24);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = random_shape(rng);
        const std::size_t rows = s.batch * s.width * s.height, cols = s.kernel_w * s.kernel_h * s.in_channels;
        const auto x = random_vec(in_size(s), rng), c = random_vec(rows * cols, rng);
        std::vector<double> unfolded(rows * cols), folded(in_size(s));
        k::parallel::im2col(s, x.data(), unfolded.data());
        k::parallel::col2im(s, c.data(), folded.data());
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < unfolded.size(); ++i) lhs += unfolded[i] * c[i];
        for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * folded[i];
        CHECK(testing::rel_err(lhs, rhs, 1e-9) < 1e-11);
    }
}

TEST_CASE("gemm: backends agree for every transpose combination and beta") {
    SplitMix64 rng(25);
    for (int trial = 0; trial < 40; ++trial) {
        const bool ta = rng.below(2), tb = rng.below(2);
        const std::size_t m = 1 + rng.below(9), n = 1 + rng.below(9), kk = rng.below(9);
        const std::size_t lda = (ta ? m : kk) + rng.below(3), ldb = (tb ? kk : n) + rng.below(3), ldc = n + rng.below(3);
        const auto a = random_vec((ta ? kk : m) * std::max<std::size_t>(lda, 1) + 1, rng);
        const auto b = random_vec((tb ? n : kk) * std::max<std::size_t>(ldb, 1) + 1, rng);
        auto c_ref = random_vec(m * ldc, rng);
        auto c_par = c_ref;
        const double alpha = rng.uniform(-2, 2), beta = trial % 3 == 0 ? 0.0 : rng.uniform(-1, 1);
        k::reference::gemm(ta, tb, m, n, kk, alpha, a.data(), std::max<std::size_t>(lda, 1), b.data(),
                           std::max<std::size_t>(ldb, 1), beta, c_ref.data(), ldc);
        k::parallel::gemm(ta, tb, m, n, kk, alpha, a.data(), std::max<std::size_t>(lda, 1), b.data(),
                          std::max<std::size_t>(ldb, 1), beta, c_par.data(), ldc);
        check_close(c_par, c_ref, 1e-11);
    }
}

TEST_CASE("backend selection is scoped") {
    const auto before = k::backend();
    {
        k::ScopedBackend guard(k::Backend::reference);
        CHECK(k::backend() == k::Backend::reference);
    }
    CHECK(k::backend() == before);
    CHECK(std::string(k::backend_name(k::Backend::parallel)) == "parallel");
}
