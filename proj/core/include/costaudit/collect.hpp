#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "costaudit/catalog.hpp"
#include "costaudit/ledger.hpp"

namespace costaudit {

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{500};  // doubles per retry
};

// Providers name the token-usage fields differently, so the mapping from
// ledger fields to dotted response paths is configuration, not code.
struct CollectorConfig {
    std::string endpoint_url;  // OpenAI-compatible chat completions endpoint
    std::string credential_env = "COSTAUDIT_API_KEY";
    std::string model_id;
    // keys: prompt_tokens, output_tokens, thinking_tokens (optional)
    std::map<std::string, std::string, std::less<>> usage_field_map;
    nlohmann::json generation_params = nlohmann::json::object();  // opaque passthrough
    int max_in_flight = 4;
    RetryPolicy retry;
    int timeout_seconds = 60;
};

// Built-in field maps for the provider families the catalog covers.
std::map<std::string, std::string, std::less<>> provider_field_map(std::string_view provider);

// JSON config: endpoint_url and model_id required; provider selects a
// preset field map, usage_field_map entries override it.
CollectorConfig load_collector_config(const std::filesystem::path& path);

struct CollectQuery {
    std::string query_id;
    std::string dataset_id;
    std::string text;
};

// JSONL with fields query_id, dataset_id, text.
std::vector<CollectQuery> load_collect_queries(const std::filesystem::path& path);

struct CollectFailure {
    std::string query_id;
    int trial_index = 0;
    std::string reason;
};

struct CollectOptions {
    // Non-empty: read canned response files from this directory instead of
    // the network ("<query_id>_t<trial>.json", falling back to
    // "<query_id>.json").
    std::filesystem::path dry_run_dir;
    // Abort once accumulated cost reaches this many USD (0 = unlimited);
    // requires pricing.
    double max_spend_usd = 0;
    const ModelPricing* pricing = nullptr;
    bool echo_query_text = false;  // copy the prompt into query_text
};

struct CollectResult {
    std::vector<UsageRecord> records;  // completion order
    std::vector<CollectFailure> failures;
    std::size_t missing_thinking = 0;
    bool aborted_on_budget = false;
};

// One record per (query, trial), trial_index 0..trials-1. Failed calls are
// recorded in `failures` after retries, never as partial records. Up to
// max_in_flight requests run concurrently.
CollectResult collect(const CollectorConfig& config, std::span<const CollectQuery> queries, int trials,
                      const CollectOptions& options = {});

// Walks a dotted key path ("usage.completion_tokens"); nullptr when absent.
const nlohmann::json* json_path_get(const nlohmann::json& doc, std::string_view path);

}  // namespace costaudit
