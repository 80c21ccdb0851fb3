#include "klucrl/kl_opt.hpp"
#include "klucrl/rng.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

struct Instance {
    klucrl::SimplexVector p;
    std::vector<double> v;
};

Instance make_instance(std::size_t dim, std::uint64_t seed) {
    klucrl::Rng rng(seed);
    std::vector<double> p(dim);
    double total = 0.0;
    for (auto& x : p) {
        x = rng.exponential();
        total += x;
    }
    for (auto& x : p) x /= total;
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.uniform01();
    return {klucrl::SimplexVector(std::move(p)), std::move(v)};
}

void BM_MaxKl(benchmark::State& state) {
    const auto inst = make_instance(static_cast<std::size_t>(state.range(0)), 7);
    double eps = 0.05;
    for (auto _ : state) {
        auto sol = klucrl::max_kl(inst.p, inst.v, eps);
        benchmark::DoNotOptimize(sol.q);
    }
}
BENCHMARK(BM_MaxKl)->Arg(3)->Arg(6)->Arg(10)->Arg(50)->Arg(200);

void BM_MaxL1(benchmark::State& state) {
    const auto inst = make_instance(static_cast<std::size_t>(state.range(0)), 7);
    for (auto _ : state) {
        auto q = klucrl::max_l1(inst.p, inst.v, 0.4);
        benchmark::DoNotOptimize(q);
    }
}
BENCHMARK(BM_MaxL1)->Arg(3)->Arg(6)->Arg(10)->Arg(50)->Arg(200);

void BM_NewtonSolve(benchmark::State& state) {
    const auto inst = make_instance(static_cast<std::size_t>(state.range(0)), 11);
    for (auto _ : state) {
        double nu = klucrl::newton_solve(inst.p, inst.v, 1e-4);
        benchmark::DoNotOptimize(nu);
    }
}
BENCHMARK(BM_NewtonSolve)->Arg(3)->Arg(10)->Arg(50);

} // namespace
