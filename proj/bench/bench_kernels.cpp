// Serial reference path vs OpenMP path for the hot node loops.

#include "warpgraph/warped.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

namespace {

using namespace warpgraph;

struct Setup {
    explicit Setup(int n)
        : fiber(make(n)),
          wp(fiber, ScalarField::from_function(fiber.grid, [](const FiberGrid& g, std::size_t p) {
                 return 1.0 + 0.3 * std::cos(g.coords(p)[0]);
             })),
          u(ScalarField::from_function(fiber.grid, [](const FiberGrid& g, std::size_t p) {
              const auto x = g.coords(p);
              return 0.3 * std::sin(x[0]) + 0.1 * std::cos(x[1]);
          })),
          v(ScalarField::from_function(fiber.grid, [](const FiberGrid& g, std::size_t p) {
              return std::sin(2.0 * g.coords(p)[1]);
          })),
          H(fiber.grid, 0.0) {}

    static geometry::Fiber make(int n) {
        const int dims[2] = {n, n};
        const double ext[2] = {2 * std::numbers::pi, 2 * std::numbers::pi};
        return geometry::build_torus(dims, ext);
    }

    geometry::Fiber fiber;
    WarpedProduct wp;
    ScalarField u, v, H;
};

Exec exec_of(const benchmark::State& s) { return s.range(1) ? Exec::parallel : Exec::serial; }

void BM_Residual(benchmark::State& state) {
    const Setup s(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(mean_curvature_residual(s.wp, s.u, s.H, exec_of(state)));
    }
}

void BM_LaplaceBeltrami(benchmark::State& state) {
    const Setup s(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(geometry::laplace_beltrami(s.u, s.wp.metric(), exec_of(state)));
    }
}

void BM_DirectionalDerivative(benchmark::State& state) {
    const Setup s(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(residual_directional_derivative(s.wp, s.u, s.v, exec_of(state)));
    }
}

// second argument: 0 = serial reference, 1 = OpenMP
BENCHMARK(BM_Residual)->ArgsProduct({{64, 256, 512}, {0, 1}});
BENCHMARK(BM_LaplaceBeltrami)->ArgsProduct({{64, 256, 512}, {0, 1}});
BENCHMARK(BM_DirectionalDerivative)->ArgsProduct({{64, 256}, {0, 1}});

}  // namespace

BENCHMARK_MAIN();
