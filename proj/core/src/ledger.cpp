#include "costaudit/ledger.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

#include <json.hpp>

#include "costaudit/errors.hpp"
#include "costaudit/money.hpp"
#include "text_util.hpp"

namespace costaudit {

namespace {

constexpr const char* kColumns[] = {"record_id",     "model_id",      "dataset_id", "query_id",
                                    "trial_index",   "prompt_tokens", "output_tokens",
                                    "thinking_tokens", "timestamp",   "query_text"};

std::int64_t parse_count(std::string_view text, const char* field) {
    std::int64_t value = 0;
    auto trimmed = detail::trim(text);
    auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), value);
    if (ec != std::errc{} || ptr != trimmed.data() + trimmed.size()) {
        throw ParseError(std::string(field) + " is not an integer: '" + std::string(text) + "'");
    }
    return value;
}

void check_timestamp(const std::string& ts) {
    if (ts.size() < 10) throw ParseError("timestamp is not ISO-8601: '" + ts + "'");
    Date::parse(std::string_view(ts).substr(0, 10));
}

UsageRecord record_from_json(const nlohmann::json& obj, IngestReport* report) {
    UsageRecord rec;
    auto require_string = [&](const char* key) -> std::string {
        if (!obj.contains(key) || !obj.at(key).is_string()) {
            throw ParseError(std::string("missing or non-string field '") + key + "'");
        }
        return obj.at(key).get<std::string>();
    };
    auto require_int = [&](const char* key) -> std::int64_t {
        if (!obj.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
        const auto& v = obj.at(key);
        if (!v.is_number_integer()) {
            throw ParseError(std::string(key) + " is not an integer");
        }
        return v.get<std::int64_t>();
    };

    rec.record_id = require_string("record_id");
    rec.model_id = require_string("model_id");
    rec.dataset_id = require_string("dataset_id");
    rec.query_id = require_string("query_id");
    rec.trial_index = static_cast<int>(require_int("trial_index"));
    rec.prompt_tokens = require_int("prompt_tokens");
    rec.output_tokens = require_int("output_tokens");
    if (obj.contains("thinking_tokens") && !obj.at("thinking_tokens").is_null()) {
        if (!obj.at("thinking_tokens").is_number_integer()) {
            throw ParseError("thinking_tokens is not an integer");
        }
        rec.thinking_tokens = obj.at("thinking_tokens").get<std::int64_t>();
    } else {
        // Non-reasoning responses legitimately carry no thinking count.
        rec.thinking_tokens = 0;
        if (report) ++report->missing_thinking;
    }
    if (obj.contains("timestamp") && obj.at("timestamp").is_string()) {
        rec.timestamp = obj.at("timestamp").get<std::string>();
        check_timestamp(*rec.timestamp);
    }
    if (obj.contains("query_text") && obj.at("query_text").is_string()) {
        rec.query_text = obj.at("query_text").get<std::string>();
    }
    if (obj.contains("aggregate") && obj.at("aggregate").is_boolean()) {
        rec.aggregate = obj.at("aggregate").get<bool>();
    }
    return rec;
}

}  // namespace

void validate_record(const UsageRecord& record) {
    if (record.record_id.empty()) throw ValidationError("empty record_id");
    if (record.model_id.empty()) throw ValidationError("empty model_id");
    if (record.dataset_id.empty()) throw ValidationError("empty dataset_id");
    if (record.query_id.empty()) throw ValidationError("empty query_id");
    if (record.trial_index < 0) throw ValidationError("negative trial_index");
    if (record.prompt_tokens < 0 || record.output_tokens < 0 || record.thinking_tokens < 0) {
        throw ValidationError("negative token count in record '" + record.record_id + "'");
    }
    if (record.thinking_tokens > record.output_tokens) {
        throw ValidationError("thinking exceeds output in record '" + record.record_id + "' (" +
                              std::to_string(record.thinking_tokens) + " > " +
                              std::to_string(record.output_tokens) + ")");
    }
}

void Ledger::append(UsageRecord record) {
    validate_record(record);
    auto key = std::make_tuple(record.model_id, record.dataset_id, record.query_id, record.trial_index);
    if (key_index_.count(key) != 0) {
        throw ValidationError("duplicate record key (" + record.model_id + ", " + record.dataset_id + ", " +
                              record.query_id + ", trial " + std::to_string(record.trial_index) + ")");
    }
    if (record_ids_.count(record.record_id) != 0) {
        throw ValidationError("duplicate record_id '" + record.record_id + "'");
    }
    std::size_t idx = records_.size();
    key_index_.emplace(key, idx);
    record_ids_.emplace(record.record_id, idx);
    cells_[{record.model_id, record.dataset_id}].push_back(idx);
    queries_[{record.model_id, record.dataset_id, record.query_id}].push_back(idx);
    records_.push_back(std::move(record));
}

Ledger Ledger::ingest(const std::filesystem::path& path, IngestMode mode, IngestReport* report) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open ledger file: " + path.string());
    std::string name = path.filename().string();
    auto ext = path.extension();
    if (ext == ".csv" || ext == ".tsv") return parse_csv(in, name, mode, report);
    if (ext == ".jsonl" || ext == ".ndjson") return parse_jsonl(in, name, mode, report);
    int first = in.peek();
    return first == '{' ? parse_jsonl(in, name, mode, report) : parse_csv(in, name, mode, report);
}

Ledger Ledger::parse_jsonl(std::istream& in, std::string_view source_name, IngestMode mode, IngestReport* report) {
    Ledger ledger;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        try {
            nlohmann::json obj;
            try {
                obj = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(std::string("unparseable line: ") + e.what());
            }
            if (!obj.is_object()) throw ParseError("line is not a JSON object");
            ledger.append(record_from_json(obj, report));
            if (report) ++report->accepted;
        } catch (const Error& e) {
            std::string message = std::string(source_name) + " line " + std::to_string(line_no) + ": " + e.what();
            if (mode == IngestMode::strict) throw ValidationError(message);
            if (report) {
                ++report->skipped;
                report->issues.push_back(message);
            }
        }
    }
    return ledger;
}

Ledger Ledger::parse_csv(std::istream& in, std::string_view source_name, IngestMode mode, IngestReport* report) {
    Ledger ledger;
    std::string line;
    if (!std::getline(in, line) || detail::trim(line).empty()) {
        throw ParseError(std::string(source_name) + ": empty ledger file");
    }
    auto header = detail::split_csv_line(line);
    std::map<std::string, std::size_t, std::less<>> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[std::string(detail::trim(header[i]))] = i;
    for (const char* required : {"record_id", "model_id", "dataset_id", "query_id", "trial_index",
                                 "prompt_tokens", "output_tokens"}) {
        if (col.find(required) == col.end()) {
            throw ParseError(std::string(source_name) + ": missing column '" + required + "'");
        }
    }
    bool has_thinking = col.count("thinking_tokens") != 0;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        try {
            auto fields = detail::split_csv_line(line);
            if (fields.size() < header.size()) {
                throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
            }
            auto get = [&](const char* key) -> std::string_view {
                auto it = col.find(key);
                return it == col.end() ? std::string_view{} : std::string_view(fields[it->second]);
            };
            UsageRecord rec;
            rec.record_id = detail::trim(get("record_id"));
            rec.model_id = detail::trim(get("model_id"));
            rec.dataset_id = detail::trim(get("dataset_id"));
            rec.query_id = detail::trim(get("query_id"));
            rec.trial_index = static_cast<int>(parse_count(get("trial_index"), "trial_index"));
            rec.prompt_tokens = parse_count(get("prompt_tokens"), "prompt_tokens");
            rec.output_tokens = parse_count(get("output_tokens"), "output_tokens");
            if (has_thinking && !detail::trim(get("thinking_tokens")).empty()) {
                rec.thinking_tokens = parse_count(get("thinking_tokens"), "thinking_tokens");
            } else {
                rec.thinking_tokens = 0;
                if (report) ++report->missing_thinking;
            }
            if (auto ts = detail::trim(get("timestamp")); !ts.empty()) {
                rec.timestamp = std::string(ts);
                check_timestamp(*rec.timestamp);
            }
            if (col.count("query_text") != 0) {
                if (auto text = get("query_text"); !text.empty()) rec.query_text = std::string(text);
            }
            if (auto agg = detail::trim(get("aggregate")); !agg.empty()) {
                rec.aggregate = agg == "true" || agg == "1";
            }
            ledger.append(std::move(rec));
            if (report) ++report->accepted;
        } catch (const Error& e) {
            std::string message = std::string(source_name) + " line " + std::to_string(line_no) + ": " + e.what();
            if (mode == IngestMode::strict) throw ValidationError(message);
            if (report) {
                ++report->skipped;
                report->issues.push_back(message);
            }
        }
    }
    return ledger;
}

Ledger Ledger::from_records(std::vector<UsageRecord> records) {
    Ledger ledger;
    for (auto& rec : records) ledger.append(std::move(rec));
    return ledger;
}

void Ledger::write_jsonl(std::ostream& out) const {
    for (const auto& rec : records_) {
        nlohmann::ordered_json obj;
        obj["record_id"] = rec.record_id;
        obj["model_id"] = rec.model_id;
        obj["dataset_id"] = rec.dataset_id;
        obj["query_id"] = rec.query_id;
        obj["trial_index"] = rec.trial_index;
        obj["prompt_tokens"] = rec.prompt_tokens;
        obj["output_tokens"] = rec.output_tokens;
        obj["thinking_tokens"] = rec.thinking_tokens;
        if (rec.timestamp) obj["timestamp"] = *rec.timestamp;
        if (rec.query_text) obj["query_text"] = *rec.query_text;
        if (rec.aggregate) obj["aggregate"] = true;
        out << obj.dump() << '\n';
    }
}

std::vector<std::string> Ledger::model_ids() const {
    std::set<std::string> ids;
    for (const auto& [key, idx] : cells_) ids.insert(key.first);
    return {ids.begin(), ids.end()};
}

std::vector<std::string> Ledger::dataset_ids() const {
    std::set<std::string> ids;
    for (const auto& [key, idx] : cells_) ids.insert(key.second);
    return {ids.begin(), ids.end()};
}

std::vector<const UsageRecord*> Ledger::cell(std::string_view model_id, std::string_view dataset_id) const {
    std::vector<const UsageRecord*> out;
    auto it = cells_.find(std::make_pair(std::string(model_id), std::string(dataset_id)));
    if (it == cells_.end()) return out;
    out.reserve(it->second.size());
    for (std::size_t idx : it->second) out.push_back(&records_[idx]);
    return out;
}

std::vector<const UsageRecord*> Ledger::query_records(std::string_view model_id, std::string_view dataset_id,
                                                      std::string_view query_id) const {
    std::vector<const UsageRecord*> out;
    auto it = queries_.find(std::make_tuple(std::string(model_id), std::string(dataset_id), std::string(query_id)));
    if (it == queries_.end()) return out;
    out.reserve(it->second.size());
    for (std::size_t idx : it->second) out.push_back(&records_[idx]);
    return out;
}

std::vector<AggregateUsage> Ledger::aggregate_usage(TrialFilter filter) const {
    if (records_.empty()) throw ValidationError("empty ledger");
    std::vector<AggregateUsage> out;
    for (const auto& [key, indices] : cells_) {
        AggregateUsage agg;
        agg.model_id = key.first;
        agg.dataset_id = key.second;
        std::set<std::string_view> queries;
        for (std::size_t idx : indices) {
            const UsageRecord& rec = records_[idx];
            if (filter == TrialFilter::originals_only && rec.trial_index != 0) continue;
            agg.total_prompt_tokens += rec.prompt_tokens;
            agg.total_output_tokens += rec.output_tokens;
            agg.total_thinking_tokens += rec.thinking_tokens;
            queries.insert(rec.query_id);
        }
        agg.query_count = queries.size();
        if (!queries.empty()) out.push_back(std::move(agg));
    }
    return out;
}

}  // namespace costaudit
