#include "ult/init.hpp"
#include "ult/kernels.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

using namespace ult;

namespace {

struct fixture {
    mother_net net;
    prune_mask mask;
    probe_grid grid{{0.0}, {1.0}, 2};

    explicit fixture(long points) {
        architecture a;
        a.widths = {1, 250, 21, 250, 1};
        a.kinds.assign(4, layer_kind::shared);
        init_spec s;
        s.sigma_w.assign(4, 2.0);
        s.seed = 1;
        s.bias = bias_convention::per_layer;
        net = sample(a, s);
        mask = prune_mask::all(net, false);
        std::mt19937_64 g(2);
        std::bernoulli_distribution keep(0.04);
        for (auto& b : mask.bits) b = keep(g);
        grid = probe_grid({0.0}, {1.0}, points);
    }
};

const target_fn sine = [](const double* x, double* y) { y[0] = std::sin(6.283185307179586 * x[0]) + 1.0; };

void bm_sup_serial(benchmark::State& st) {
    const fixture f(st.range(0));
    const sparse_net sn(f.net, f.mask);
    for (auto _ : st) benchmark::DoNotOptimize(serial::sup_error(sn, 1.0, f.grid, sine));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void bm_sup_parallel(benchmark::State& st) {
    const fixture f(st.range(0));
    const sparse_net sn(f.net, f.mask);
    for (auto _ : st) benchmark::DoNotOptimize(parallel::sup_error(sn, 1.0, f.grid, sine));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void bm_sup_dense(benchmark::State& st) {
    const fixture f(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(sup_error_dense(f.net, f.mask, 1.0, f.grid, sine));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

std::vector<double> ground(int n) {
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = u(g);
    return v;
}

void bm_best_k_serial(benchmark::State& st) {
    const auto v = ground(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(serial::best_k(v, 0.377, 5));
}

void bm_best_k_parallel(benchmark::State& st) {
    const auto v = ground(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(parallel::best_k(v, 0.377, 5));
}

void bm_success_serial(benchmark::State& st) {
    for (auto _ : st)
        benchmark::DoNotOptimize(
            serial::success_count(distribution::uniform, 30, 1.0, 0.01, 200, solve_strategy::best_k, 0, 5));
}

void bm_success_parallel(benchmark::State& st) {
    for (auto _ : st)
        benchmark::DoNotOptimize(
            parallel::success_count(distribution::uniform, 30, 1.0, 0.01, 200, solve_strategy::best_k, 0, 5));
}

} // namespace

BENCHMARK(bm_sup_serial)->Arg(1000)->Arg(10000);
BENCHMARK(bm_sup_parallel)->Arg(1000)->Arg(10000);
BENCHMARK(bm_sup_dense)->Arg(1000)->Arg(10000);
BENCHMARK(bm_best_k_serial)->Arg(20)->Arg(30);
BENCHMARK(bm_best_k_parallel)->Arg(20)->Arg(30);
BENCHMARK(bm_success_serial);
BENCHMARK(bm_success_parallel);

BENCHMARK_MAIN();
