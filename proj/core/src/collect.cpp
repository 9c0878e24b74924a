#include "costaudit/collect.hpp"

#include <atomic>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "costaudit/cost.hpp"
#include "costaudit/errors.hpp"
#include "http_util.hpp"
#include "text_util.hpp"

namespace costaudit {

namespace {

std::string now_iso8601() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::int64_t extract_count(const nlohmann::json& response, const std::string& path, const char* field) {
    const nlohmann::json* node = json_path_get(response, path);
    if (!node) {
        throw ParseError(std::string("usage payload is missing mapped path '") + path + "' for " + field);
    }
    if (!node->is_number_integer()) {
        throw ParseError(std::string("usage field at '") + path + "' is not an integer");
    }
    return node->get<std::int64_t>();
}

}  // namespace

const nlohmann::json* json_path_get(const nlohmann::json& doc, std::string_view path) {
    const nlohmann::json* node = &doc;
    while (!path.empty()) {
        auto dot = path.find('.');
        std::string key(path.substr(0, dot));
        if (!node->is_object() || !node->contains(key)) return nullptr;
        node = &node->at(key);
        if (dot == std::string_view::npos) break;
        path.remove_prefix(dot + 1);
    }
    return node;
}

std::map<std::string, std::string, std::less<>> provider_field_map(std::string_view provider) {
    std::string p(provider);
    for (auto& c : p) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (p == "openai" || p == "moonshot ai" || p == "moonshot") {
        return {{"prompt_tokens", "usage.prompt_tokens"},
                {"output_tokens", "usage.completion_tokens"},
                {"thinking_tokens", "usage.completion_tokens_details.reasoning_tokens"}};
    }
    if (p == "google") {
        return {{"prompt_tokens", "usage.prompt_tokens"},
                {"output_tokens", "usage.completion_tokens"},
                {"thinking_tokens", "usage.thoughts_token_count"}};
    }
    if (p == "anthropic") {
        return {{"prompt_tokens", "usage.prompt_tokens"},
                {"output_tokens", "usage.completion_tokens"},
                {"thinking_tokens", "usage.thinking_tokens"}};
    }
    if (p == "minimax") {
        return {{"prompt_tokens", "usage.prompt_tokens"},
                {"output_tokens", "usage.completion_tokens"},
                {"thinking_tokens", "usage.reasoning_tokens"}};
    }
    throw NotFoundError("no built-in field map for provider '" + std::string(provider) + "'");
}

CollectorConfig load_collector_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open collector config: " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }

    CollectorConfig config;
    auto require = [&](const char* key) -> std::string {
        if (!doc.contains(key) || !doc.at(key).is_string()) {
            throw ParseError(path.string() + ": missing string field '" + key + "'");
        }
        return doc.at(key).get<std::string>();
    };
    config.endpoint_url = require("endpoint_url");
    config.model_id = require("model_id");
    if (doc.contains("credential_env")) config.credential_env = doc.at("credential_env").get<std::string>();
    if (doc.contains("provider")) {
        config.usage_field_map = provider_field_map(doc.at("provider").get<std::string>());
    }
    if (doc.contains("usage_field_map")) {
        for (auto it = doc.at("usage_field_map").begin(); it != doc.at("usage_field_map").end(); ++it) {
            config.usage_field_map[it.key()] = it.value().get<std::string>();
        }
    }
    if (config.usage_field_map.count("prompt_tokens") == 0 || config.usage_field_map.count("output_tokens") == 0) {
        throw ValidationError(path.string() +
                              ": usage_field_map must cover prompt_tokens and output_tokens at minimum");
    }
    if (doc.contains("generation_params")) config.generation_params = doc.at("generation_params");
    if (doc.contains("max_in_flight")) config.max_in_flight = doc.at("max_in_flight").get<int>();
    if (config.max_in_flight < 1) throw ValidationError(path.string() + ": max_in_flight must be >= 1");
    if (doc.contains("timeout_seconds")) config.timeout_seconds = doc.at("timeout_seconds").get<int>();
    if (doc.contains("retry")) {
        const auto& r = doc.at("retry");
        if (r.contains("max_attempts")) config.retry.max_attempts = r.at("max_attempts").get<int>();
        if (r.contains("backoff_ms")) {
            config.retry.backoff_base = std::chrono::milliseconds(r.at("backoff_ms").get<int>());
        }
    }
    return config;
}

std::vector<CollectQuery> load_collect_queries(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open query file: " + path.string());
    std::vector<CollectQuery> queries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
        }
        CollectQuery q;
        for (const char* key : {"query_id", "dataset_id", "text"}) {
            if (!obj.contains(key) || !obj.at(key).is_string()) {
                throw ParseError(path.string() + " line " + std::to_string(line_no) + ": missing '" + key + "'");
            }
        }
        q.query_id = obj.at("query_id").get<std::string>();
        q.dataset_id = obj.at("dataset_id").get<std::string>();
        q.text = obj.at("text").get<std::string>();
        queries.push_back(std::move(q));
    }
    return queries;
}

namespace {

struct Job {
    const CollectQuery* query;
    int trial;
};

nlohmann::json perform_dry_run(const CollectOptions& options, const Job& job) {
    auto trial_file = options.dry_run_dir / (job.query->query_id + "_t" + std::to_string(job.trial) + ".json");
    auto base_file = options.dry_run_dir / (job.query->query_id + ".json");
    std::ifstream in(trial_file);
    if (!in) in.open(base_file);
    if (!in) {
        throw IoError("no canned response for query '" + job.query->query_id + "' (looked for " +
                      trial_file.filename().string() + ", " + base_file.filename().string() + ")");
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("canned response for '" + job.query->query_id + "': " + e.what());
    }
}

nlohmann::json perform_request(const CollectorConfig& config, const Job& job) {
    auto url = detail::split_url(config.endpoint_url);
    nlohmann::json body;
    body["model"] = config.model_id;
    body["messages"] = nlohmann::json::array({nlohmann::json{{"role", "user"}, {"content", job.query->text}}});
    for (auto it = config.generation_params.begin(); it != config.generation_params.end(); ++it) {
        body[it.key()] = it.value();
    }

    httplib::Headers headers;
    if (const char* key = std::getenv(config.credential_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    } else if (!config.credential_env.empty()) {
        throw ValidationError("credential environment variable '" + config.credential_env + "' is not set");
    }

    std::string last_error;
    for (int attempt = 1; attempt <= config.retry.max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(config.retry.backoff_base * (1 << (attempt - 2)));
        }
        httplib::Client client(url.base);
        client.set_connection_timeout(config.timeout_seconds, 0);
        client.set_read_timeout(config.timeout_seconds, 0);
        auto res = client.Post(url.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403) {
            throw ValidationError("authentication failure (HTTP " + std::to_string(res->status) + ")");
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("bad response JSON: ") + e.what();
        }
    }
    throw Error("retry exhaustion after " + std::to_string(config.retry.max_attempts) +
                " attempts: " + last_error);
}

}  // namespace

CollectResult collect(const CollectorConfig& config, std::span<const CollectQuery> queries, int trials,
                      const CollectOptions& options) {
    if (trials < 1) throw ValidationError("trials must be >= 1");
    if (config.usage_field_map.count("prompt_tokens") == 0 || config.usage_field_map.count("output_tokens") == 0) {
        throw ValidationError("usage_field_map must cover prompt_tokens and output_tokens at minimum");
    }
    if (options.max_spend_usd > 0 && options.pricing == nullptr) {
        throw ValidationError("max_spend_usd requires pricing");
    }

    std::vector<Job> jobs;
    jobs.reserve(queries.size() * static_cast<std::size_t>(trials));
    for (const auto& q : queries) {
        for (int t = 0; t < trials; ++t) jobs.push_back({&q, t});
    }

    CollectResult result;
    std::mutex result_mutex;  // the single ledger writer
    std::atomic<std::size_t> next_job{0};
    std::atomic<bool> budget_hit{false};
    double spent = 0;  // guarded by result_mutex

    auto worker = [&]() {
        while (true) {
            std::size_t i = next_job.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            if (budget_hit.load()) {
                // Account for every skipped job so records + failures always
                // add up to |queries| * trials.
                std::lock_guard lock(result_mutex);
                result.aborted_on_budget = true;
                result.failures.push_back({job.query->query_id, job.trial, "skipped: max spend reached"});
                continue;
            }
            try {
                nlohmann::json response = options.dry_run_dir.empty() ? perform_request(config, job)
                                                                      : perform_dry_run(options, job);
                UsageRecord rec;
                rec.record_id = config.model_id + "|" + job.query->dataset_id + "|" + job.query->query_id +
                                "|t" + std::to_string(job.trial);
                rec.model_id = config.model_id;
                rec.dataset_id = job.query->dataset_id;
                rec.query_id = job.query->query_id;
                rec.trial_index = job.trial;
                rec.prompt_tokens = extract_count(response, config.usage_field_map.at("prompt_tokens"),
                                                  "prompt_tokens");
                rec.output_tokens = extract_count(response, config.usage_field_map.at("output_tokens"),
                                                  "output_tokens");
                auto thinking_path = config.usage_field_map.find("thinking_tokens");
                bool thinking_missing = thinking_path == config.usage_field_map.end() ||
                                        json_path_get(response, thinking_path->second) == nullptr;
                rec.thinking_tokens = thinking_missing
                                          ? 0
                                          : extract_count(response, thinking_path->second, "thinking_tokens");
                rec.timestamp = now_iso8601();
                if (options.echo_query_text) rec.query_text = job.query->text;
                validate_record(rec);

                std::lock_guard lock(result_mutex);
                if (thinking_missing) ++result.missing_thinking;
                if (options.max_spend_usd > 0) {
                    spent += query_cost_usd(*options.pricing, rec);
                    if (spent >= options.max_spend_usd) budget_hit.store(true);
                }
                result.records.push_back(std::move(rec));
            } catch (const std::exception& e) {
                std::lock_guard lock(result_mutex);
                result.failures.push_back({job.query->query_id, job.trial, e.what()});
            }
        }
    };

    std::size_t thread_count = std::min<std::size_t>(static_cast<std::size_t>(config.max_in_flight), jobs.size());
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (std::size_t i = 0; i < thread_count; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return result;
}

}  // namespace costaudit
