#include "costaudit/cost.hpp"

#include "costaudit/errors.hpp"

namespace costaudit {

namespace {

void check_model(const ModelPricing& pricing, const UsageRecord& record) {
    if (record.model_id != pricing.model_id) {
        throw ValidationError("record model '" + record.model_id + "' does not match pricing for '" +
                              pricing.model_id + "'");
    }
}

}  // namespace

double query_cost_usd(const ModelPricing& pricing, const UsageRecord& record) {
    check_model(pricing, record);
    return token_cost_usd(pricing.input_price_per_mtok, record.prompt_tokens) +
           token_cost_usd(pricing.output_price_per_mtok, record.output_tokens);
}

double ablated_cost_usd(const ModelPricing& pricing, const UsageRecord& record) {
    check_model(pricing, record);
    return token_cost_usd(pricing.input_price_per_mtok, record.prompt_tokens) +
           token_cost_usd(pricing.output_price_per_mtok, record.output_tokens - record.thinking_tokens);
}

namespace {

double sum_dataset(const ModelPricing& pricing, const Ledger& ledger, std::string_view dataset_id, bool ablated) {
    auto records = ledger.cell(pricing.model_id, dataset_id);
    double total = 0;
    std::size_t used = 0;
    for (const UsageRecord* rec : records) {
        if (rec->trial_index != 0) continue;
        total += ablated ? ablated_cost_usd(pricing, *rec) : query_cost_usd(pricing, *rec);
        ++used;
    }
    if (used == 0) {
        throw NotFoundError("no original-trial records for (" + pricing.model_id + ", " +
                            std::string(dataset_id) + ")");
    }
    return total;
}

}  // namespace

double dataset_cost_usd(const ModelPricing& pricing, const Ledger& ledger, std::string_view dataset_id) {
    return sum_dataset(pricing, ledger, dataset_id, false);
}

double dataset_ablated_cost_usd(const ModelPricing& pricing, const Ledger& ledger, std::string_view dataset_id) {
    return sum_dataset(pricing, ledger, dataset_id, true);
}

CostBreakdown cost_breakdown(const ModelPricing& pricing, std::span<const UsageRecord* const> records, Scope scope) {
    CostBreakdown b;
    b.model_id = pricing.model_id;
    b.scope = scope;
    for (const UsageRecord* rec : records) {
        check_model(pricing, *rec);
        b.prompt_tokens += rec->prompt_tokens;
        b.thinking_tokens += rec->thinking_tokens;
        b.generation_tokens += rec->output_tokens - rec->thinking_tokens;
    }
    b.prompt_cost = token_cost_usd(pricing.input_price_per_mtok, b.prompt_tokens);
    b.thinking_cost = token_cost_usd(pricing.output_price_per_mtok, b.thinking_tokens);
    b.generation_cost = token_cost_usd(pricing.output_price_per_mtok, b.generation_tokens);
    b.total_cost = b.prompt_cost + b.thinking_cost + b.generation_cost;
    return b;
}

CostBreakdown cost_breakdown(const ModelPricing& pricing, std::span<const UsageRecord> records, Scope scope) {
    std::vector<const UsageRecord*> ptrs;
    ptrs.reserve(records.size());
    for (const auto& rec : records) ptrs.push_back(&rec);
    return cost_breakdown(pricing, ptrs, scope);
}

double thinking_share(const CostBreakdown& breakdown, ShareVariant variant) {
    if (variant == ShareVariant::tokens) {
        std::int64_t output = breakdown.thinking_tokens + breakdown.generation_tokens;
        if (output <= 0) throw ValidationError("thinking share undefined: no output tokens");
        return static_cast<double>(breakdown.thinking_tokens) / static_cast<double>(output);
    }
    if (breakdown.total_cost <= 0) throw ValidationError("thinking share undefined: zero total cost");
    return breakdown.thinking_cost / breakdown.total_cost;
}

}  // namespace costaudit
