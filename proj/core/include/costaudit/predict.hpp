#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "costaudit/catalog.hpp"
#include "costaudit/ledger.hpp"

namespace costaudit {

struct LabeledQuery {
    std::string query_id;
    std::string dataset_id;
    std::string model_id;
    std::int64_t prompt_tokens = 0;
    double actual_cost = 0;
    std::optional<std::vector<double>> embedding;
};

// 80/20 by default, stratified by dataset_id. Each stratum is shuffled with
// a generator derived from (seed, dataset_id), so the same seed selects the
// same queries regardless of input order or which other strata are present.
struct SplitSpec {
    double test_ratio = 0.2;  // in (0,1)
    std::uint64_t seed = 0;
};

struct Split {
    std::vector<LabeledQuery> train;
    std::vector<LabeledQuery> test;
};

// Disjoint and exhaustive; per-stratum test count = round(size * ratio),
// at least 1 when the stratum has >= 2 queries. A stratum of size 1 is an
// error, as is an empty input.
Split stratified_split(std::span<const LabeledQuery> queries, const SplitSpec& spec);

// Training-set mean cost of the query's model, independent of the query.
double predict_mean(std::span<const LabeledQuery> train, const LabeledQuery& query);

struct LinearModel {
    double slope = 0;      // USD per prompt token
    double intercept = 0;  // USD
    bool mean_fallback = false;  // set when all prompt lengths coincide

    double predict(std::int64_t prompt_tokens) const {
        return mean_fallback ? intercept : slope * static_cast<double>(prompt_tokens) + intercept;
    }
};

// Ordinary least squares of actual_cost on prompt_tokens, one model per key.
// A degenerate design (single distinct prompt length) falls back to the
// training mean with mean_fallback set.
std::map<std::string, LinearModel, std::less<>> fit_prompt_length_lr(std::span<const LabeledQuery> train);

// 1 - dot(a,b) / (|a||b|). Throws on dimension mismatch or zero vectors.
double cosine_distance(std::span<const double> a, std::span<const double> b);

struct KnnOptions {
    int k = 5;
    bool distance_weighted = false;  // default: unweighted mean of neighbors
};

// Mean cost of the k nearest same-model training queries by cosine
// distance; distance ties break by ascending query_id.
double predict_knn(std::span<const LabeledQuery> train, const LabeledQuery& query, const KnnOptions& options = {});

struct PredictionPair {
    std::string query_id;
    double predicted = 0;
    double actual = 0;
};

double evaluate_mae(std::span<const PredictionPair> pairs);

enum class Baseline { mean, prompt_length_lr, embedding_knn };

std::string_view baseline_name(Baseline baseline);

struct PredictionReport {
    std::string model_id;
    Baseline baseline = Baseline::mean;
    double mae = 0;  // pooled over the test set
    std::vector<PredictionPair> per_query;
    // Pooled and per-dataset MAE are reported side by side.
    std::map<std::string, double, std::less<>> per_dataset_mae;
    int k = 0;  // knn only
};

// One labeled query per original-trial record of the model.
std::vector<LabeledQuery> labeled_queries(const Ledger& ledger, const PricingCatalog& catalog,
                                          std::string_view model_id);

// Splits, fits on train, evaluates MAE on test. All queries must belong to
// one model; embeddings must be attached beforehand for the knn baseline.
PredictionReport run_baseline(std::span<const LabeledQuery> queries, Baseline baseline, const SplitSpec& spec,
                              const KnnOptions& knn = {});

}  // namespace costaudit
