#include "costaudit/ranking.hpp"

#include <algorithm>
#include <cmath>

#include "costaudit/cost.hpp"
#include "costaudit/errors.hpp"

namespace costaudit {

std::vector<std::string> rank_models(const std::map<std::string, double, std::less<>>& values) {
    if (values.empty()) throw ValidationError("cannot rank an empty value map");
    std::vector<std::pair<double, std::string>> order;
    order.reserve(values.size());
    for (const auto& [model, value] : values) {
        if (!std::isfinite(value)) {
            throw ValidationError("non-finite value for model '" + model + "'");
        }
        order.emplace_back(value, model);
    }
    std::sort(order.begin(), order.end());  // ties fall back to lexicographic model id
    std::vector<std::string> ranking;
    ranking.reserve(order.size());
    for (auto& [value, model] : order) ranking.push_back(std::move(model));
    return ranking;
}

std::vector<ReversalPair> find_reversals(const PricingCatalog& catalog,
                                         const std::map<std::string, double, std::less<>>& costs,
                                         std::string_view task_id) {
    std::vector<std::pair<std::string, double>> listed;  // sorted by model id via map order
    for (const auto& [model, cost] : costs) {
        if (!std::isfinite(cost)) throw ValidationError("non-finite cost for model '" + model + "'");
        listed.emplace_back(model, catalog.listed_price_usd(model));
    }
    std::vector<ReversalPair> pairs;
    auto costs_at = [&](const std::string& m) { return costs.find(m)->second; };
    for (std::size_t i = 0; i < listed.size(); ++i) {
        for (std::size_t j = i + 1; j < listed.size(); ++j) {
            const auto& [model_i, price_i] = listed[i];
            const auto& [model_j, price_j] = listed[j];
            if (price_i == price_j) continue;
            const auto& cheaper = price_i < price_j ? listed[i] : listed[j];
            const auto& pricier = price_i < price_j ? listed[j] : listed[i];
            double cheaper_cost = costs_at(cheaper.first);
            double pricier_cost = costs_at(pricier.first);
            if (cheaper_cost <= pricier_cost) continue;  // ties are not reversals
            ReversalPair pair;
            pair.task_id = task_id;
            pair.cheaper_listed_model = cheaper.first;
            pair.pricier_listed_model = pricier.first;
            pair.price_ratio = pricier.second / cheaper.second;
            pair.cost_ratio = cheaper_cost / pricier_cost;
            pairs.push_back(std::move(pair));
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const ReversalPair& a, const ReversalPair& b) {
        return std::tie(a.cheaper_listed_model, a.pricier_listed_model) <
               std::tie(b.cheaper_listed_model, b.pricier_listed_model);
    });
    return pairs;
}

std::pair<double, double> reversal_severity(const ReversalPair& pair) {
    if (!(pair.price_ratio > 1.0) || !(pair.cost_ratio > 1.0)) {
        throw ValidationError("not a valid reversal pair: ratios must both exceed 1");
    }
    return {pair.price_ratio, pair.cost_ratio};
}

double kendall_tau(std::span<const std::string> ranking_a, std::span<const std::string> ranking_b) {
    if (ranking_a.size() != ranking_b.size() || ranking_a.size() < 2) {
        throw ValidationError("kendall_tau requires two rankings of the same set, size >= 2");
    }
    std::map<std::string_view, std::size_t> pos_a, pos_b;
    for (std::size_t i = 0; i < ranking_a.size(); ++i) pos_a[ranking_a[i]] = i;
    for (std::size_t i = 0; i < ranking_b.size(); ++i) pos_b[ranking_b[i]] = i;
    if (pos_a.size() != ranking_a.size() || pos_b.size() != ranking_b.size()) {
        throw ValidationError("kendall_tau rankings contain duplicates");
    }
    for (const auto& [model, idx] : pos_a) {
        if (pos_b.find(model) == pos_b.end()) {
            throw ValidationError("kendall_tau rankings cover different sets ('" + std::string(model) +
                                  "' missing)");
        }
    }
    long long discordant = 0;
    std::vector<std::string_view> items(ranking_a.begin(), ranking_a.end());
    for (std::size_t i = 0; i < items.size(); ++i) {
        for (std::size_t j = i + 1; j < items.size(); ++j) {
            // order in ranking_a is i before j by construction
            if (pos_b[items[i]] > pos_b[items[j]]) ++discordant;
        }
    }
    double pairs = static_cast<double>(items.size()) * (static_cast<double>(items.size()) - 1) / 2.0;
    // Strict rankings have no ties, so tau-a reduces to 1 - 2d/C(n,2);
    // computing it in that form keeps the identity with the reversal count
    // bit-exact.
    return 1.0 - 2.0 * static_cast<double>(discordant) / pairs;
}

double kendall_tau_values(const std::map<std::string, double, std::less<>>& a,
                          const std::map<std::string, double, std::less<>>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw ValidationError("kendall_tau requires two value maps over the same set, size >= 2");
    }
    std::vector<std::pair<double, double>> points;
    points.reserve(a.size());
    for (const auto& [model, va] : a) {
        auto it = b.find(model);
        if (it == b.end()) throw ValidationError("kendall_tau value maps cover different sets");
        points.emplace_back(va, it->second);
    }
    long long concordant = 0, discordant = 0, tied = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            double da = points[i].first - points[j].first;
            double db = points[i].second - points[j].second;
            if (da == 0 || db == 0) {
                ++tied;  // counts as neither concordant nor discordant
            } else {
                (da * db > 0 ? concordant : discordant) += 1;
            }
        }
    }
    double n = static_cast<double>(points.size());
    double pairs = n * (n - 1) / 2.0;
    // Without ties tau-a is exactly 1 - 2d/C(n,2); prefer that form so the
    // identity with the reversal count holds bit-exactly.
    if (tied == 0) return 1.0 - 2.0 * static_cast<double>(discordant) / pairs;
    return static_cast<double>(concordant - discordant) / pairs;
}

std::map<std::string, double, std::less<>> task_costs(const PricingCatalog& catalog, const Ledger& ledger,
                                                      std::string_view task_id, CostMode cost_mode) {
    std::map<std::string, double, std::less<>> costs;
    for (const auto& model : ledger.model_ids()) {
        auto records = ledger.cell(model, task_id);
        bool has_original = std::any_of(records.begin(), records.end(),
                                        [](const UsageRecord* r) { return r->trial_index == 0; });
        if (!has_original) continue;
        const ModelPricing& pricing = catalog.pricing(model);
        costs[model] = cost_mode == CostMode::actual ? dataset_cost_usd(pricing, ledger, task_id)
                                                     : dataset_ablated_cost_usd(pricing, ledger, task_id);
    }
    if (costs.empty()) throw NotFoundError("unknown task '" + std::string(task_id) + "': no records");
    return costs;
}

namespace {

std::map<std::string, double, std::less<>> listed_prices_for(const PricingCatalog& catalog,
                                                             const std::map<std::string, double, std::less<>>& costs) {
    std::map<std::string, double, std::less<>> listed;
    for (const auto& [model, cost] : costs) listed[model] = catalog.listed_price_usd(model);
    return listed;
}

RankingComparison compare_single_task(const PricingCatalog& catalog, const Ledger& ledger,
                                      std::string_view task_id, CostMode cost_mode) {
    auto costs = task_costs(catalog, ledger, task_id, cost_mode);
    if (costs.size() < 2) {
        throw ValidationError("task '" + std::string(task_id) + "' has fewer than two models to compare");
    }
    auto listed = listed_prices_for(catalog, costs);

    RankingComparison cmp;
    cmp.task_id = task_id;
    cmp.cost_mode = cost_mode;
    cmp.price_ranking = rank_models(listed);
    cmp.cost_ranking = rank_models(costs);
    cmp.reversal_pairs = find_reversals(catalog, costs, task_id);
    cmp.reversal_count = static_cast<int>(cmp.reversal_pairs.size());
    int n = static_cast<int>(costs.size());
    cmp.pair_count = n * (n - 1) / 2;
    cmp.reversal_rate = static_cast<double>(cmp.reversal_count) / cmp.pair_count;
    cmp.kendall_tau = kendall_tau_values(listed, costs);
    return cmp;
}

}  // namespace

RankingComparison compare_rankings(const PricingCatalog& catalog, const Ledger& ledger, std::string_view task_id,
                                   CostMode cost_mode) {
    if (task_id != "ALL") return compare_single_task(catalog, ledger, task_id, cost_mode);

    auto tasks = ledger.dataset_ids();
    if (tasks.empty()) throw ValidationError("empty ledger");

    RankingComparison cmp;
    cmp.task_id = "ALL";
    cmp.cost_mode = cost_mode;
    std::map<std::string, double, std::less<>> workload_costs;
    double tau_sum = 0;
    for (const auto& task : tasks) {
        RankingComparison per_task = compare_single_task(catalog, ledger, task, cost_mode);
        cmp.reversal_count += per_task.reversal_count;
        cmp.pair_count += per_task.pair_count;
        tau_sum += per_task.kendall_tau;
        for (auto& pair : per_task.reversal_pairs) cmp.reversal_pairs.push_back(std::move(pair));
        for (const auto& [model, cost] : task_costs(catalog, ledger, task, cost_mode)) {
            workload_costs[model] += cost;
        }
    }
    cmp.reversal_rate = static_cast<double>(cmp.reversal_count) / cmp.pair_count;
    cmp.kendall_tau = tau_sum / static_cast<double>(tasks.size());
    cmp.price_ranking = rank_models(listed_prices_for(catalog, workload_costs));
    cmp.cost_ranking = rank_models(workload_costs);
    return cmp;
}

AblationReport ablation_report(const PricingCatalog& catalog, const Ledger& ledger) {
    auto tasks = ledger.dataset_ids();
    if (tasks.empty()) throw ValidationError("empty ledger");

    AblationReport report;
    for (const auto& task : tasks) {
        RankingComparison actual = compare_rankings(catalog, ledger, task, CostMode::actual);
        RankingComparison ablated = compare_rankings(catalog, ledger, task, CostMode::ablated);
        AblationRow row;
        row.task_id = task;
        row.tau_actual = actual.kendall_tau;
        row.tau_ablated = ablated.kendall_tau;
        row.reversals_actual = actual.reversal_count;
        row.reversals_ablated = ablated.reversal_count;
        report.rows.push_back(std::move(row));
    }
    double n = static_cast<double>(report.rows.size());
    for (const auto& row : report.rows) {
        report.avg_tau_actual += row.tau_actual / n;
        report.avg_tau_ablated += row.tau_ablated / n;
        report.avg_reversals_actual += row.reversals_actual / n;
        report.avg_reversals_ablated += row.reversals_ablated / n;
    }
    return report;
}

}  // namespace costaudit
