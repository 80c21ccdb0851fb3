#include "klucrl/envs.hpp"
#include "klucrl/extended_vi.hpp"
#include "klucrl/mdp.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_ValueIterationRiverSwim(benchmark::State& state) {
    const klucrl::Environment env = klucrl::riverswim();
    const double tol = std::pow(10.0, -static_cast<double>(state.range(0)));
    for (auto _ : state) {
        auto sol = klucrl::value_iteration(env.model(), tol);
        benchmark::DoNotOptimize(sol.gain);
    }
}
BENCHMARK(BM_ValueIterationRiverSwim)->Arg(4)->Arg(6)->Arg(8);

void BM_ExtendedViKl(benchmark::State& state) {
    klucrl::SparseGenConfig cfg;
    cfg.n_states = static_cast<int>(state.range(0));
    cfg.n_actions = 5;
    cfg.avg_out_degree = std::min(5.0, static_cast<double>(cfg.n_states));
    cfg.seed = 3;
    const klucrl::Environment env = klucrl::random_sparse(cfg);
    const auto conf =
        klucrl::ConfidenceSet::around(env.model(), 0.1, 0.02, klucrl::Metric::KL);
    for (auto _ : state) {
        auto sol = klucrl::extended_value_iteration(conf, 1e-3);
        benchmark::DoNotOptimize(sol.gain);
    }
}
BENCHMARK(BM_ExtendedViKl)->Arg(6)->Arg(10)->Arg(20);

void BM_Diameter(benchmark::State& state) {
    klucrl::SparseGenConfig cfg;
    cfg.n_states = static_cast<int>(state.range(0));
    cfg.seed = 5;
    const klucrl::Environment env = klucrl::random_sparse(cfg);
    for (auto _ : state) {
        double d = klucrl::compute_diameter(env.model());
        benchmark::DoNotOptimize(d);
    }
}
BENCHMARK(BM_Diameter)->Arg(10);

} // namespace

BENCHMARK_MAIN();
