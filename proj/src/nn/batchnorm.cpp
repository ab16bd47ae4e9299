#include <cmath>

#include "qocr/error.hpp"
#include "qocr/nn.hpp"

namespace qocr::nn {

namespace {

void check_params(const Tensor& input, const BatchNormParams& p) {
    const std::size_t c = p.channels();
    if (p.beta.size() != c || p.running_mean.size() != c || p.running_var.size() != c)
        throw DimensionError("batchnorm parameters disagree on channel count");
    if (input.rank() < 1 || input.shape().back() != c)
        throw DimensionError("batchnorm input " + shape_string(input.shape()) + " does not end in " +
                             std::to_string(c) + " channels");
}

}  // namespace

BatchNormResult batchnorm_forward(const Tensor& input, const BatchNormParams& p, Mode mode) {
    check_params(input, p);
    const std::size_t C = p.channels();
    const std::size_t M = input.size() / C;
    if (mode == Mode::train && M < 2)
        throw DimensionError("batchnorm train mode needs at least 2 values per channel, got " + std::to_string(M));

    BatchNormResult r{Tensor(input.shape()), {}};
    auto& cache = r.cache;
    cache.mode = mode;
    cache.shape = input.shape();
    cache.normalized = Tensor(input.shape());
    cache.mean.assign(C, 0.0);
    cache.variance.assign(C, 0.0);
    cache.inv_std.assign(C, 0.0);

    const double* x = input.data();
    if (mode == Mode::train) {
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t c = 0; c < C; ++c) cache.mean[c] += x[m * C + c];
        for (auto& v : cache.mean) v /= static_cast<double>(M);
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t c = 0; c < C; ++c) {
                const double d = x[m * C + c] - cache.mean[c];
                cache.variance[c] += d * d;
            }
        for (auto& v : cache.variance) v /= static_cast<double>(M);
    } else {
        for (std::size_t c = 0; c < C; ++c) {
            cache.mean[c] = p.running_mean[c];
            cache.variance[c] = p.running_var[c];
        }
    }
    for (std::size_t c = 0; c < C; ++c) cache.inv_std[c] = 1.0 / std::sqrt(cache.variance[c] + p.epsilon);

    double* xh = cache.normalized.data();
    double* y = r.output.data();
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t c = 0; c < C; ++c) {
            const std::size_t i = m * C + c;
            xh[i] = (x[i] - cache.mean[c]) * cache.inv_std[c];
            y[i] = p.gamma[c] * xh[i] + p.beta[c];
        }
    return r;
}

BatchNormGrads batchnorm_backward(const BatchNormCache& cache, const BatchNormParams& p, const Tensor& upstream) {
    if (upstream.shape() != cache.shape)
        throw DimensionError("batchnorm upstream gradient " + shape_string(upstream.shape()) +
                             " does not match forward shape " + shape_string(cache.shape));
    const std::size_t C = p.channels();
    const std::size_t M = upstream.size() / C;
    BatchNormGrads g{Tensor(cache.shape), Tensor({C}), Tensor({C})};

    const double* dy = upstream.data();
    const double* xh = cache.normalized.data();
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t c = 0; c < C; ++c) {
            g.beta[c] += dy[m * C + c];
            g.gamma[c] += dy[m * C + c] * xh[m * C + c];
        }

    double* dx = g.input.data();
    if (cache.mode == Mode::infer) {
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t c = 0; c < C; ++c) dx[m * C + c] = dy[m * C + c] * p.gamma[c] * cache.inv_std[c];
        return g;
    }

    // dx = gamma * inv_std / M * (M * dy - sum(dy) - x_hat * sum(dy * x_hat))
    const double inv_m = 1.0 / static_cast<double>(M);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t c = 0; c < C; ++c) {
            const std::size_t i = m * C + c;
            dx[i] = p.gamma[c] * cache.inv_std[c] * inv_m *
                    (static_cast<double>(M) * dy[i] - g.beta[c] - xh[i] * g.gamma[c]);
        }
    return g;
}

void update_running_stats(BatchNormParams& p, const BatchNormCache& cache) {
    if (cache.mode != Mode::train) return;
    const std::size_t C = p.channels();
    const std::size_t M = shape_size(cache.shape) / C;
    const double unbias = static_cast<double>(M) / static_cast<double>(M - 1);
    for (std::size_t c = 0; c < C; ++c) {
        p.running_mean[c] = p.momentum * p.running_mean[c] + (1.0 - p.momentum) * cache.mean[c];
        p.running_var[c] = p.momentum * p.running_var[c] + (1.0 - p.momentum) * cache.variance[c] * unbias;
    }
}

}  // namespace qocr::nn
