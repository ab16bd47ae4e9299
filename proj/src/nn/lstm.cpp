#include <algorithm>
#include <cmath>

#include "qocr/error.hpp"
#include "qocr/kernels.hpp"
#include "qocr/nn.hpp"

namespace qocr::nn {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct SeqDims {
    bool batched;
    std::size_t n, t, d;
};

SeqDims seq_dims(const Tensor& seq, const char* what) {
    if (seq.rank() == 2) return {false, 1, seq.dim(0), seq.dim(1)};
    if (seq.rank() == 3) return {true, seq.dim(0), seq.dim(1), seq.dim(2)};
    throw DimensionError(std::string(what) + " expects [T,D] or [N,T,D], got " + shape_string(seq.shape()));
}

// Copies [N][T][width] rows, reversing the time axis when `reverse` is set.
void copy_steps(const double* src, double* dst, std::size_t n, std::size_t t, std::size_t width, bool reverse) {
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t s = 0; s < t; ++s) {
            const std::size_t from = reverse ? t - 1 - s : s;
            std::copy_n(src + (b * t + from) * width, width, dst + (b * t + s) * width);
        }
}

void check_lstm_params(const LstmParams& p) {
    if (p.input_weights.rank() != 2 || p.recurrent_weights.rank() != 2 || p.bias.rank() != 1)
        throw DimensionError("lstm parameters must be matrices plus a bias vector");
    const std::size_t h = p.recurrent_weights.dim(1);
    if (p.recurrent_weights.dim(0) != 4 * h || p.input_weights.dim(0) != 4 * h || p.bias.dim(0) != 4 * h)
        throw DimensionError("lstm parameter shapes inconsistent: W " + shape_string(p.input_weights.shape()) +
                             ", U " + shape_string(p.recurrent_weights.shape()) + ", b " +
                             shape_string(p.bias.shape()));
}

}  // namespace

LstmResult lstm_forward(const Tensor& seq, const LstmParams& p, Direction direction) {
    check_lstm_params(p);
    const auto dims = seq_dims(seq, "lstm_forward");
    const std::size_t N = dims.n, T = dims.t, D = dims.d, H = p.hidden(), G = 4 * H;
    if (D != p.input_size())
        throw DimensionError("lstm input width " + std::to_string(D) + " does not match weights " +
                             shape_string(p.input_weights.shape()));

    LstmResult r;
    auto& c = r.cache;
    c.direction = direction;
    c.batched = dims.batched;
    c.batch = N;
    c.steps = T;
    c.input_size = D;
    c.hidden = H;
    c.input.resize(N * T * D);
    c.gates.resize(N * T * G);
    c.cell.resize(N * T * H);
    c.cell_tanh.resize(N * T * H);
    c.hidden_states.resize(N * T * H);

    const bool reverse = direction == Direction::backward;
    copy_steps(seq.data(), c.input.data(), N, T, D, reverse);

    double* gates = c.gates.data();
    kernels::gemm(false, true, N * T, G, D, 1.0, c.input.data(), D, p.input_weights.data(), D, 0.0, gates, G);
    for (std::size_t row = 0; row < N * T; ++row)
        for (std::size_t j = 0; j < G; ++j) gates[row * G + j] += p.bias[j];

    for (std::size_t t = 0; t < T; ++t) {
        if (t > 0)
            kernels::gemm(false, true, N, G, H, 1.0, c.hidden_states.data() + (t - 1) * H, T * H,
                          p.recurrent_weights.data(), H, 1.0, gates + t * G, T * G);
        const auto batch = static_cast<std::ptrdiff_t>(N);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t bb = 0; bb < batch; ++bb) {
            const auto b = static_cast<std::size_t>(bb);
            double* a = gates + (b * T + t) * G;
            const double* c_prev = t > 0 ? c.cell.data() + (b * T + t - 1) * H : nullptr;
            double* cell = c.cell.data() + (b * T + t) * H;
            double* ct = c.cell_tanh.data() + (b * T + t) * H;
            double* h = c.hidden_states.data() + (b * T + t) * H;
            for (std::size_t j = 0; j < H; ++j) {
                const double i = sigmoid(a[j]);
                const double f = sigmoid(a[H + j]);
                const double g = std::tanh(a[2 * H + j]);
                const double o = sigmoid(a[3 * H + j]);
                a[j] = i;
                a[H + j] = f;
                a[2 * H + j] = g;
                a[3 * H + j] = o;
                cell[j] = (c_prev ? f * c_prev[j] : 0.0) + i * g;
                ct[j] = std::tanh(cell[j]);
                h[j] = o * ct[j];
            }
        }
    }

    Shape out_shape = dims.batched ? Shape{N, T, H} : Shape{T, H};
    r.output = Tensor(out_shape);
    copy_steps(c.hidden_states.data(), r.output.data(), N, T, H, reverse);
    return r;
}

LstmGrads lstm_backward(const LstmCache& c, const LstmParams& p, const Tensor& upstream) {
    check_lstm_params(p);
    const std::size_t N = c.batch, T = c.steps, D = c.input_size, H = c.hidden, G = 4 * H;
    const Shape out_shape = c.batched ? Shape{N, T, H} : Shape{T, H};
    if (upstream.shape() != out_shape)
        throw DimensionError("lstm upstream gradient " + shape_string(upstream.shape()) + " does not match output " +
                             shape_string(out_shape));
    const bool reverse = c.direction == Direction::backward;

    std::vector<double> dh_up(N * T * H);
    copy_steps(upstream.data(), dh_up.data(), N, T, H, reverse);

    std::vector<double> d_gates(N * T * G);
    std::vector<double> dh_next(N * H, 0.0);
    std::vector<double> dc_next(N * H, 0.0);

    for (std::size_t tt = T; tt-- > 0;) {
        const auto batch = static_cast<std::ptrdiff_t>(N);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t bb = 0; bb < batch; ++bb) {
            const auto b = static_cast<std::size_t>(bb);
            const std::size_t row = b * T + tt;
            const double* a = c.gates.data() + row * G;
            const double* ct = c.cell_tanh.data() + row * H;
            const double* c_prev = tt > 0 ? c.cell.data() + (row - 1) * H : nullptr;
            const double* up = dh_up.data() + row * H;
            double* da = d_gates.data() + row * G;
            double* dhn = dh_next.data() + b * H;
            double* dcn = dc_next.data() + b * H;
            for (std::size_t j = 0; j < H; ++j) {
                const double i = a[j], f = a[H + j], g = a[2 * H + j], o = a[3 * H + j];
                const double dh = up[j] + dhn[j];
                const double dc = dh * o * (1.0 - ct[j] * ct[j]) + dcn[j];
                da[j] = dc * g * i * (1.0 - i);
                da[H + j] = c_prev ? dc * c_prev[j] * f * (1.0 - f) : 0.0;
                da[2 * H + j] = dc * i * (1.0 - g * g);
                da[3 * H + j] = dh * ct[j] * o * (1.0 - o);
                dcn[j] = dc * f;
            }
        }
        if (tt > 0)
            kernels::gemm(false, false, N, H, G, 1.0, d_gates.data() + tt * G, T * G, p.recurrent_weights.data(), H,
                          0.0, dh_next.data(), H);
    }

    LstmGrads g;
    g.input_weights = Tensor(p.input_weights.shape());
    g.recurrent_weights = Tensor(p.recurrent_weights.shape());
    g.bias = Tensor(p.bias.shape());

    kernels::gemm(true, false, G, D, N * T, 1.0, d_gates.data(), G, c.input.data(), D, 0.0, g.input_weights.data(), D);

    std::vector<double> h_prev(N * T * H, 0.0);
    for (std::size_t b = 0; b < N; ++b)
        for (std::size_t t = 1; t < T; ++t)
            std::copy_n(c.hidden_states.data() + (b * T + t - 1) * H, H, h_prev.data() + (b * T + t) * H);
    kernels::gemm(true, false, G, H, N * T, 1.0, d_gates.data(), G, h_prev.data(), H, 0.0,
                  g.recurrent_weights.data(), H);

    for (std::size_t row = 0; row < N * T; ++row)
        for (std::size_t j = 0; j < G; ++j) g.bias[j] += d_gates[row * G + j];

    std::vector<double> dx(N * T * D);
    kernels::gemm(false, false, N * T, D, G, 1.0, d_gates.data(), G, p.input_weights.data(), D, 0.0, dx.data(), D);
    g.input = Tensor(c.batched ? Shape{N, T, D} : Shape{T, D});
    copy_steps(dx.data(), g.input.data(), N, T, D, reverse);
    return g;
}

BiLstmResult bidirectional_lstm(const Tensor& seq, const BiLstmParams& p) {
    if (p.forward.hidden() != p.backward.hidden())
        throw DimensionError("bidirectional lstm hidden sizes differ: " + std::to_string(p.forward.hidden()) +
                             " vs " + std::to_string(p.backward.hidden()));
    auto fwd = lstm_forward(seq, p.forward, Direction::forward);
    auto bwd = lstm_forward(seq, p.backward, Direction::backward);
    const std::size_t H = p.forward.hidden();
    const std::size_t rows = fwd.output.size() / H;

    Shape out_shape = fwd.output.shape();
    out_shape.back() = 2 * H;
    BiLstmResult r{Tensor(out_shape), std::move(fwd.cache), std::move(bwd.cache)};
    for (std::size_t i = 0; i < rows; ++i) {
        std::copy_n(fwd.output.data() + i * H, H, r.output.data() + i * 2 * H);
        std::copy_n(bwd.output.data() + i * H, H, r.output.data() + i * 2 * H + H);
    }
    return r;
}

BiLstmGrads bidirectional_lstm_backward(const BiLstmResult& result, const BiLstmParams& p, const Tensor& upstream) {
    if (upstream.shape() != result.output.shape())
        throw DimensionError("bidirectional lstm upstream gradient " + shape_string(upstream.shape()) +
                             " does not match output " + shape_string(result.output.shape()));
    const std::size_t H = p.forward.hidden();
    const std::size_t rows = upstream.size() / (2 * H);
    Shape half = upstream.shape();
    half.back() = H;
    Tensor up_f(half), up_b(half);
    for (std::size_t i = 0; i < rows; ++i) {
        std::copy_n(upstream.data() + i * 2 * H, H, up_f.data() + i * H);
        std::copy_n(upstream.data() + i * 2 * H + H, H, up_b.data() + i * H);
    }
    BiLstmGrads g;
    g.forward = lstm_backward(result.forward_cache, p.forward, up_f);
    g.backward = lstm_backward(result.backward_cache, p.backward, up_b);
    g.input = add(g.forward.input, g.backward.input);
    return g;
}

}  // namespace qocr::nn
