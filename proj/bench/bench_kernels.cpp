// Reference vs parallel kernels at the full-size network layer shapes, batch 4.

#include <benchmark/benchmark.h>

#include <vector>

#include "qocr/kernels.hpp"
#include "qocr/rng.hpp"

namespace k = qocr::kernels;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
    qocr::SplitMix64 rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

// conv blocks: {width, height, cin, cout}
constexpr std::size_t kLayers[][4] = {{128, 32, 1, 32}, {64, 16, 32, 64}, {32, 8, 64, 128}, {32, 4, 128, 128}, {32, 2, 128, 256}};

k::ConvShape shape_of(int layer) {
    const auto* l = kLayers[layer];
    return {4, l[0], l[1], l[2], l[3], 3, 3};
}

template <auto Forward>
void conv_forward(benchmark::State& st) {
    const auto s = shape_of(static_cast<int>(st.range(0)));
    const auto in = noise(s.batch * s.width * s.height * s.in_channels, 1);
    const auto w = noise(s.kernel_w * s.kernel_h * s.in_channels * s.out_channels, 2);
    const auto b = noise(s.out_channels, 3);
    std::vector<double> out(s.batch * s.width * s.height * s.out_channels);
    for (auto _ : st) {
        Forward(s, in.data(), w.data(), b.data(), out.data());
        benchmark::DoNotOptimize(out.data());
    }
}

template <auto Backward>
void conv_backward(benchmark::State& st) {
    const auto s = shape_of(static_cast<int>(st.range(0)));
    const auto in = noise(s.batch * s.width * s.height * s.in_channels, 1);
    const auto w = noise(s.kernel_w * s.kernel_h * s.in_channels * s.out_channels, 2);
    const auto up = noise(s.batch * s.width * s.height * s.out_channels, 3);
    std::vector<double> gi(in.size()), gw(w.size()), gb(s.out_channels);
    for (auto _ : st) {
        Backward(s, in.data(), w.data(), up.data(), gi.data(), gw.data(), gb.data());
        benchmark::DoNotOptimize(gw.data());
    }
}

template <auto Gemm>
void gemm(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto a = noise(n * n, 1), b = noise(n * n, 2);
    std::vector<double> c(n * n);
    for (auto _ : st) {
        Gemm(false, false, n, n, n, 1.0, a.data(), n, b.data(), n, 0.0, c.data(), n);
        benchmark::DoNotOptimize(c.data());
    }
    st.counters["flops"] = benchmark::Counter(2.0 * n * n * n, benchmark::Counter::kIsIterationInvariantRate);
}

}  // namespace

BENCHMARK(conv_forward<k::reference::conv2d_forward>)->Name("conv_forward/reference")->DenseRange(0, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(conv_forward<k::parallel::conv2d_forward>)->Name("conv_forward/parallel")->DenseRange(0, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(conv_backward<k::reference::conv2d_backward>)->Name("conv_backward/reference")->DenseRange(0, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(conv_backward<k::parallel::conv2d_backward>)->Name("conv_backward/parallel")->DenseRange(0, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(gemm<k::reference::gemm>)->Name("gemm/reference")->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMicrosecond);
BENCHMARK(gemm<k::parallel::gemm>)->Name("gemm/parallel")->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
