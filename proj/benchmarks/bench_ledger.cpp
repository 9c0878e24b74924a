#include <benchmark/benchmark.h>

#include <sstream>

#include "costaudit/fixtures.hpp"
#include "costaudit/ledger.hpp"

namespace {

std::string big_jsonl(int copies) {
    // replicate the fixture with distinct trial indices to scale it up
    auto base = costaudit::fixtures::load_ledger();
    std::ostringstream out;
    for (int c = 0; c < copies; ++c) {
        for (auto rec : base.records()) {
            rec.record_id += "_" + std::to_string(c);
            rec.trial_index = c;
            costaudit::Ledger::from_records({rec}).write_jsonl(out);
        }
    }
    return out.str();
}

void BM_IngestJsonl(benchmark::State& state) {
    std::string data = big_jsonl(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        std::istringstream in(data);
        auto ledger = costaudit::Ledger::parse_jsonl(in, "bench");
        benchmark::DoNotOptimize(ledger.size());
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_IngestJsonl)->Arg(10)->Arg(100);

void BM_AggregateUsage(benchmark::State& state) {
    auto ledger = costaudit::fixtures::load_ledger();
    for (auto _ : state) {
        auto rows = ledger.aggregate_usage(costaudit::TrialFilter::originals_only);
        benchmark::DoNotOptimize(rows.size());
    }
}
BENCHMARK(BM_AggregateUsage);

}  // namespace
