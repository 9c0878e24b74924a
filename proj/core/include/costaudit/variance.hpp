#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "costaudit/catalog.hpp"
#include "costaudit/ledger.hpp"

namespace costaudit {

enum class VarianceMetric { thinking_tokens, cost };

struct TrialObservation {
    int trial_index = 0;
    std::int64_t thinking_tokens = 0;
    double cost = 0;
};

// Repeated runs of one identical query: same (model, dataset, query),
// distinct trial indices, at least two observations.
struct TrialGroup {
    std::string model_id;
    std::string dataset_id;
    std::string query_id;
    std::vector<TrialObservation> observations;
};

struct WithinQueryStats {
    double mean = 0;
    double sample_std = 0;   // (k-1) denominator
    double cv = 0;           // sample_std / mean
    double max_min_ratio = 0;
    std::vector<double> normalized_values;  // each observation / mean
};

// Core statistics over raw values. Throws ValidationError when fewer than
// two values, when the mean is not positive (cv undefined), or when the
// minimum is not positive (ratio undefined).
WithinQueryStats within_query_stats(std::span<const double> values);
WithinQueryStats within_query_stats(const TrialGroup& group, VarianceMetric metric);

// All repeated-trial groups for one model, sorted by (dataset, query).
// Costs come from the catalog pricing for that model.
std::vector<TrialGroup> trial_groups(const Ledger& ledger, const PricingCatalog& catalog,
                                     std::string_view model_id);

struct QueryVarianceRow {
    std::string dataset_id;
    std::string query_id;
    std::size_t trial_count = 0;
    double mean = 0;
    double cv = 0;
    double max_min_ratio = 0;
};

struct ModelVarianceSummary {
    std::string model_id;
    VarianceMetric metric = VarianceMetric::thinking_tokens;
    double mean_cv = 0;    // unweighted mean of per-query cv
    double max_ratio = 0;  // maximum per-query max/min ratio
    std::vector<QueryVarianceRow> per_query;
};

// Throws NotFoundError when the model has no repeated trials.
ModelVarianceSummary model_variance_summary(const Ledger& ledger, const PricingCatalog& catalog,
                                            std::string_view model_id, VarianceMetric metric);

}  // namespace costaudit
