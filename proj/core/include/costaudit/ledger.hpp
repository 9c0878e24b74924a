#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace costaudit {

// One API call's token accounting. Thinking tokens are the hidden
// deliberation portion of the output and never exceed output_tokens.
struct UsageRecord {
    std::string record_id;
    std::string model_id;
    std::string dataset_id;
    std::string query_id;
    int trial_index = 0;  // 0 = original run, 1..k = repeated trials
    std::int64_t prompt_tokens = 0;
    std::int64_t output_tokens = 0;
    std::int64_t thinking_tokens = 0;
    std::optional<std::string> timestamp;  // ISO-8601
    std::optional<std::string> query_text;
    // True when the record carries per-(model, dataset) totals rather than
    // one call; such records keep table-level analyses runnable without the
    // underlying raw data.
    bool aggregate = false;
};

enum class TrialFilter { originals_only, all_trials };

struct AggregateUsage {
    std::string model_id;
    std::string dataset_id;
    std::int64_t total_prompt_tokens = 0;
    std::int64_t total_output_tokens = 0;
    std::int64_t total_thinking_tokens = 0;
    std::size_t query_count = 0;  // distinct query ids contributing
};

// strict: reject the whole file on the first invalid record.
// lenient: skip invalid lines, collecting one issue per skip.
enum class IngestMode { strict, lenient };

struct IngestReport {
    std::size_t accepted = 0;
    std::size_t skipped = 0;
    std::size_t missing_thinking = 0;  // records defaulted to thinking_tokens = 0
    std::vector<std::string> issues;
};

// Immutable after ingest; concurrent reads unrestricted.
class Ledger {
public:
    Ledger() = default;

    // JSONL (one object per line) or delimited text with the same columns,
    // chosen by extension with a content sniff fallback.
    static Ledger ingest(const std::filesystem::path& path, IngestMode mode = IngestMode::strict,
                         IngestReport* report = nullptr);
    static Ledger parse_jsonl(std::istream& in, std::string_view source_name, IngestMode mode = IngestMode::strict,
                              IngestReport* report = nullptr);
    static Ledger parse_csv(std::istream& in, std::string_view source_name, IngestMode mode = IngestMode::strict,
                            IngestReport* report = nullptr);
    static Ledger from_records(std::vector<UsageRecord> records);

    // Validates invariants and the (model, dataset, query, trial) key.
    void append(UsageRecord record);

    // Serialization round-trips ingest output, preserving record order.
    void write_jsonl(std::ostream& out) const;

    const std::vector<UsageRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    std::vector<std::string> model_ids() const;    // sorted unique
    std::vector<std::string> dataset_ids() const;  // sorted unique

    // Records for one (model, dataset) cell, in ingest order.
    std::vector<const UsageRecord*> cell(std::string_view model_id, std::string_view dataset_id) const;
    // Records for one query across trials, in ingest order.
    std::vector<const UsageRecord*> query_records(std::string_view model_id, std::string_view dataset_id,
                                                  std::string_view query_id) const;

    // One row per (model, dataset) pair present, sorted; sums are exact.
    std::vector<AggregateUsage> aggregate_usage(TrialFilter filter) const;

private:
    std::vector<UsageRecord> records_;
    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>, std::less<>> cells_;
    std::map<std::tuple<std::string, std::string, std::string>, std::vector<std::size_t>, std::less<>> queries_;
    std::map<std::tuple<std::string, std::string, std::string, int>, std::size_t, std::less<>> key_index_;
    std::map<std::string, std::size_t, std::less<>> record_ids_;
};

// Throws ValidationError describing the first violated invariant, if any.
void validate_record(const UsageRecord& record);

}  // namespace costaudit
