#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "zk/dyadic.hpp"
#include "zk/kernels.hpp"
#include "zk/normal_form.hpp"

using namespace zk;

namespace {

std::vector<double> random_vec(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

template <void (*Kernel)(const double*, std::size_t, const double*, double*, std::size_t)>
void BM_matvec(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const std::size_t cols = 4;
    const auto T = random_vec(n * n, 1);
    const auto X = random_vec(n * cols, 2);
    std::vector<double> Y(n * cols);
    for (auto _ : state) {
        Kernel(T.data(), n, X.data(), Y.data(), cols);
        benchmark::DoNotOptimize(Y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n * cols));
}

BENCHMARK_TEMPLATE(BM_matvec, kernels::matvec_serial)->Arg(512)->Arg(1024)->Arg(2048)->Unit(benchmark::kMicrosecond);
BENCHMARK_TEMPLATE(BM_matvec, kernels::matvec_parallel)->Arg(512)->Arg(1024)->Arg(2048)->Unit(benchmark::kMicrosecond);

struct BilinearInputs {
    GridPtr g;
    AngularQuadrature q;
    RadialField f, h;
    explicit BilinearInputs(int n)
        : g(make_grid(n, 12)),
          q(make_angular_quadrature(24)),
          f(lp_project(sample(g, [](double r) { return cplx(std::cos(16 * r) * std::exp(-(r - 4) * (r - 4) / 2)); }), 16.0)),
          h(sample(g, [](double r) { return cplx(std::exp(-r * r / 18)); })) {}
};

void BM_bilinear_parallel(benchmark::State& state) {
    const BilinearInputs in(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(apply_bilinear({KernelKind::omega_plus, 0.125}, in.f, in.h, in.q));
}

void BM_bilinear_reference(benchmark::State& state) {
    const BilinearInputs in(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(apply_bilinear_reference({KernelKind::omega_plus, 0.125}, in.f, in.h, in.q));
}

BENCHMARK(BM_bilinear_parallel)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bilinear_reference)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
