#pragma once

#include <span>
#include <string>
#include <string_view>

#include "costaudit/catalog.hpp"
#include "costaudit/ledger.hpp"

namespace costaudit {

enum class Scope { query, dataset, workload };

// Cost and token decomposition by type. Generation is the visible part of
// the output (output minus thinking); thinking is billed at the output rate.
struct CostBreakdown {
    std::string model_id;
    Scope scope = Scope::query;
    double prompt_cost = 0;
    double thinking_cost = 0;
    double generation_cost = 0;
    double total_cost = 0;  // always the sum of the three components
    std::int64_t prompt_tokens = 0;
    std::int64_t thinking_tokens = 0;
    std::int64_t generation_tokens = 0;
};

enum class ShareVariant { tokens, cost };

// Cost of one call: input price times prompt tokens plus output price times
// output tokens, both per million.
double query_cost_usd(const ModelPricing& pricing, const UsageRecord& record);

// Cost with the thinking contribution removed: what the call would have
// billed if thinking tokens were free. Never exceeds query_cost_usd.
double ablated_cost_usd(const ModelPricing& pricing, const UsageRecord& record);

// Sum of query costs over the original-trial records of one (model, dataset)
// cell. Throws NotFoundError when the cell is empty.
double dataset_cost_usd(const ModelPricing& pricing, const Ledger& ledger, std::string_view dataset_id);
double dataset_ablated_cost_usd(const ModelPricing& pricing, const Ledger& ledger, std::string_view dataset_id);

CostBreakdown cost_breakdown(const ModelPricing& pricing, std::span<const UsageRecord* const> records, Scope scope);
CostBreakdown cost_breakdown(const ModelPricing& pricing, std::span<const UsageRecord> records, Scope scope);

// Fraction of output tokens (tokens variant) or of total cost (cost variant)
// attributable to thinking. Throws ValidationError on a zero denominator.
double thinking_share(const CostBreakdown& breakdown, ShareVariant variant);

}  // namespace costaudit
