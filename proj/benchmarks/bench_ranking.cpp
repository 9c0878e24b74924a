#include <benchmark/benchmark.h>

#include <random>

#include "costaudit/fixtures.hpp"
#include "costaudit/ranking.hpp"

namespace {

using costaudit::fixtures::load_catalog;
using costaudit::fixtures::load_ledger;

void BM_CompareRankingsAll(benchmark::State& state) {
    auto catalog = load_catalog();
    auto ledger = load_ledger();
    for (auto _ : state) {
        auto cmp = costaudit::compare_rankings(catalog, ledger, "ALL", costaudit::CostMode::actual);
        benchmark::DoNotOptimize(cmp.reversal_count);
    }
}
BENCHMARK(BM_CompareRankingsAll);

void BM_KendallTauValues(benchmark::State& state) {
    const auto n = state.range(0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    std::map<std::string, double, std::less<>> a, b;
    for (std::int64_t i = 0; i < n; ++i) {
        std::string key = "model_" + std::to_string(i);
        a[key] = value(rng);
        b[key] = value(rng);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(costaudit::kendall_tau_values(a, b));
    }
}
BENCHMARK(BM_KendallTauValues)->Arg(8)->Arg(64)->Arg(256);

void BM_FindReversals(benchmark::State& state) {
    auto catalog = load_catalog();
    auto ledger = load_ledger();
    auto costs = costaudit::task_costs(catalog, ledger, "MMLUPro", costaudit::CostMode::actual);
    for (auto _ : state) {
        benchmark::DoNotOptimize(costaudit::find_reversals(catalog, costs));
    }
}
BENCHMARK(BM_FindReversals);

}  // namespace
