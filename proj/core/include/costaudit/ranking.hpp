#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "costaudit/catalog.hpp"
#include "costaudit/ledger.hpp"

namespace costaudit {

enum class CostMode { actual, ablated };

// An unordered model pair where the model with the strictly lower listed
// price incurs a strictly higher cost. Ties in either quantity are not
// reversals.
struct ReversalPair {
    std::string task_id;
    std::string cheaper_listed_model;
    std::string pricier_listed_model;
    double price_ratio = 0;  // pricier listed / cheaper listed, > 1
    double cost_ratio = 0;   // cheaper-listed cost / pricier-listed cost, > 1 (the severity)
};

struct RankingComparison {
    std::string task_id;  // dataset id, or "ALL" for the pooled view
    CostMode cost_mode = CostMode::actual;
    std::vector<std::string> price_ranking;  // ascending listed price
    std::vector<std::string> cost_ranking;   // ascending cost; workload totals for "ALL"
    std::vector<ReversalPair> reversal_pairs;
    int reversal_count = 0;
    int pair_count = 0;  // C(n,2) per task, summed over tasks for "ALL"
    double reversal_rate = 0;
    // tau-a against the listed-price order; for "ALL" the unweighted mean of
    // per-task tau values.
    double kendall_tau = 0;
};

// Ascending by value; ties broken by lexicographic model id.
// Throws ValidationError on non-finite values, empty input.
std::vector<std::string> rank_models(const std::map<std::string, double, std::less<>>& values);

// All reversed pairs between listed prices and the given costs, sorted by
// (cheaper model, pricier model). Every model in `costs` must have pricing.
std::vector<ReversalPair> find_reversals(const PricingCatalog& catalog,
                                         const std::map<std::string, double, std::less<>>& costs,
                                         std::string_view task_id = {});

// Both ratios of a reversed pair, severity (cost ratio) second.
// Throws ValidationError unless both ratios exceed 1.
std::pair<double, double> reversal_severity(const ReversalPair& pair);

// Kendall tau-a between two strict rankings of the same model set
// (size >= 2): (concordant - discordant) / C(n,2).
double kendall_tau(std::span<const std::string> ranking_a, std::span<const std::string> ranking_b);

// Tau-a computed from raw values with the fixed C(n,2) denominator; pairs
// tied in either input count as neither concordant nor discordant.
double kendall_tau_values(const std::map<std::string, double, std::less<>>& a,
                          const std::map<std::string, double, std::less<>>& b);

// task_id "ALL" pools every dataset's pairwise comparisons.
RankingComparison compare_rankings(const PricingCatalog& catalog, const Ledger& ledger, std::string_view task_id,
                                   CostMode cost_mode);

struct AblationRow {
    std::string task_id;
    double tau_actual = 0;
    double tau_ablated = 0;
    int reversals_actual = 0;
    int reversals_ablated = 0;
};

// Per-task effect of pricing thinking tokens at zero, plus unweighted
// task averages.
struct AblationReport {
    std::vector<AblationRow> rows;  // sorted by task id
    double avg_tau_actual = 0;
    double avg_tau_ablated = 0;
    double avg_reversals_actual = 0;
    double avg_reversals_ablated = 0;
};

AblationReport ablation_report(const PricingCatalog& catalog, const Ledger& ledger);

// Per-task dataset costs for the models with records in the task cell.
std::map<std::string, double, std::less<>> task_costs(const PricingCatalog& catalog, const Ledger& ledger,
                                                      std::string_view task_id, CostMode cost_mode);

}  // namespace costaudit
