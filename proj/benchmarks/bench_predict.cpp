#include <benchmark/benchmark.h>

#include <random>

#include "costaudit/predict.hpp"

namespace {

std::vector<costaudit::LabeledQuery> embedded_corpus(int n, int dim) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::uniform_real_distribution<double> cost(0.001, 0.5);
    std::vector<costaudit::LabeledQuery> queries;
    queries.reserve(n);
    for (int i = 0; i < n; ++i) {
        costaudit::LabeledQuery q;
        q.query_id = "q" + std::to_string(i);
        q.dataset_id = "d" + std::to_string(i % 4);
        q.model_id = "m";
        q.prompt_tokens = 100 + i;
        q.actual_cost = cost(rng);
        std::vector<double> vec(dim);
        for (auto& v : vec) v = coord(rng);
        q.embedding = std::move(vec);
        queries.push_back(std::move(q));
    }
    return queries;
}

void BM_PredictKnn(benchmark::State& state) {
    auto corpus = embedded_corpus(static_cast<int>(state.range(0)), 256);
    auto probe = corpus.back();
    corpus.pop_back();
    for (auto _ : state) {
        benchmark::DoNotOptimize(costaudit::predict_knn(corpus, probe, {5}));
    }
}
BENCHMARK(BM_PredictKnn)->Arg(500)->Arg(2000);

void BM_StratifiedSplit(benchmark::State& state) {
    auto corpus = embedded_corpus(static_cast<int>(state.range(0)), 4);
    for (auto _ : state) {
        auto split = costaudit::stratified_split(corpus, {0.2, 7});
        benchmark::DoNotOptimize(split.test.size());
    }
}
BENCHMARK(BM_StratifiedSplit)->Arg(1000)->Arg(10000);

void BM_FitLinearRegression(benchmark::State& state) {
    auto corpus = embedded_corpus(static_cast<int>(state.range(0)), 4);
    for (auto _ : state) {
        auto models = costaudit::fit_prompt_length_lr(corpus);
        benchmark::DoNotOptimize(models.size());
    }
}
BENCHMARK(BM_FitLinearRegression)->Arg(1000)->Arg(10000);

}  // namespace
