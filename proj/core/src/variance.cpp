#include "costaudit/variance.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "costaudit/cost.hpp"
#include "costaudit/errors.hpp"

namespace costaudit {

WithinQueryStats within_query_stats(std::span<const double> values) {
    if (values.size() < 2) {
        throw ValidationError("within-query statistics require at least 2 observations, got " +
                              std::to_string(values.size()));
    }
    WithinQueryStats stats;
    double sum = 0;
    for (double v : values) sum += v;
    stats.mean = sum / static_cast<double>(values.size());
    if (stats.mean <= 0) throw ValidationError("cv undefined: mean is not positive");

    stats.normalized_values.reserve(values.size());
    for (double v : values) stats.normalized_values.push_back(v / stats.mean);

    double ss = 0;
    for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
    stats.sample_std = std::sqrt(ss / static_cast<double>(values.size() - 1));

    // cv over the mean-normalized observations rather than sample_std/mean:
    // equal in exact arithmetic, and invariant under scaling whenever the
    // scaled observations are exactly representable.
    double nss = 0;
    for (double x : stats.normalized_values) nss += (x - 1.0) * (x - 1.0);
    stats.cv = std::sqrt(nss / static_cast<double>(values.size() - 1));

    auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
    if (*min_it <= 0) throw ValidationError("max/min ratio undefined: minimum is not positive");
    stats.max_min_ratio = *max_it / *min_it;
    return stats;
}

WithinQueryStats within_query_stats(const TrialGroup& group, VarianceMetric metric) {
    std::vector<double> values;
    values.reserve(group.observations.size());
    for (const auto& obs : group.observations) {
        values.push_back(metric == VarianceMetric::thinking_tokens ? static_cast<double>(obs.thinking_tokens)
                                                                   : obs.cost);
    }
    return within_query_stats(values);
}

std::vector<TrialGroup> trial_groups(const Ledger& ledger, const PricingCatalog& catalog,
                                     std::string_view model_id) {
    const ModelPricing& pricing = catalog.pricing(model_id);
    std::map<std::pair<std::string, std::string>, TrialGroup> groups;
    for (const auto& rec : ledger.records()) {
        if (rec.model_id != model_id) continue;
        auto& group = groups[{rec.dataset_id, rec.query_id}];
        if (group.observations.empty()) {
            group.model_id = rec.model_id;
            group.dataset_id = rec.dataset_id;
            group.query_id = rec.query_id;
        }
        group.observations.push_back({rec.trial_index, rec.thinking_tokens, query_cost_usd(pricing, rec)});
    }
    std::vector<TrialGroup> out;
    for (auto& [key, group] : groups) {
        if (group.observations.size() < 2) continue;
        std::sort(group.observations.begin(), group.observations.end(),
                  [](const TrialObservation& a, const TrialObservation& b) { return a.trial_index < b.trial_index; });
        out.push_back(std::move(group));
    }
    return out;  // map order: sorted by (dataset, query)
}

ModelVarianceSummary model_variance_summary(const Ledger& ledger, const PricingCatalog& catalog,
                                            std::string_view model_id, VarianceMetric metric) {
    auto groups = trial_groups(ledger, catalog, model_id);
    if (groups.empty()) {
        throw NotFoundError("no repeated trials for model '" + std::string(model_id) + "'");
    }
    ModelVarianceSummary summary;
    summary.model_id = model_id;
    summary.metric = metric;
    double cv_sum = 0;
    for (const auto& group : groups) {
        WithinQueryStats stats = within_query_stats(group, metric);
        cv_sum += stats.cv;
        summary.max_ratio = std::max(summary.max_ratio, stats.max_min_ratio);
        summary.per_query.push_back({group.dataset_id, group.query_id, group.observations.size(), stats.mean,
                                     stats.cv, stats.max_min_ratio});
    }
    summary.mean_cv = cv_sum / static_cast<double>(groups.size());
    return summary;
}

}  // namespace costaudit
