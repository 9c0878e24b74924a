#include <benchmark/benchmark.h>

#include <random>

#include "costaudit/cost.hpp"

namespace {

std::vector<costaudit::UsageRecord> synth_records(int n) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::int64_t> prompt(0, 1'000'000);
    std::uniform_int_distribution<std::int64_t> output(1, 2'000'000);
    std::vector<costaudit::UsageRecord> records;
    records.reserve(n);
    for (int i = 0; i < n; ++i) {
        costaudit::UsageRecord r;
        r.record_id = "r" + std::to_string(i);
        r.model_id = "m";
        r.dataset_id = "d";
        r.query_id = r.record_id;
        r.prompt_tokens = prompt(rng);
        r.output_tokens = output(rng);
        r.thinking_tokens = r.output_tokens / 2;
        records.push_back(std::move(r));
    }
    return records;
}

costaudit::ModelPricing synth_pricing() {
    costaudit::ModelPricing p;
    p.model_id = "m";
    p.provider = "t";
    p.input_price_per_mtok = {600'000};
    p.output_price_per_mtok = {3'000'000};
    p.snapshot_date = {2026, 2, 28};
    return p;
}

void BM_CostBreakdown(benchmark::State& state) {
    auto records = synth_records(static_cast<int>(state.range(0)));
    auto pricing = synth_pricing();
    for (auto _ : state) {
        auto b = costaudit::cost_breakdown(pricing, std::span<const costaudit::UsageRecord>(records),
                                           costaudit::Scope::dataset);
        benchmark::DoNotOptimize(b.total_cost);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CostBreakdown)->Arg(1000)->Arg(10000);

void BM_QueryCost(benchmark::State& state) {
    auto records = synth_records(1);
    auto pricing = synth_pricing();
    for (auto _ : state) {
        benchmark::DoNotOptimize(costaudit::query_cost_usd(pricing, records[0]));
    }
}
BENCHMARK(BM_QueryCost);

}  // namespace
