#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "costaudit/collect.hpp"
#include "costaudit/errors.hpp"
#include "test_support.hpp"

using namespace costaudit;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("costaudit_collect_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

nlohmann::json canned_usage(int prompt, int completion, int reasoning, bool with_reasoning = true) {
    nlohmann::json usage{{"prompt_tokens", prompt}, {"completion_tokens", completion}};
    if (with_reasoning) usage["completion_tokens_details"] = {{"reasoning_tokens", reasoning}};
    return nlohmann::json{{"choices", nlohmann::json::array()}, {"usage", usage}};
}

CollectorConfig base_config() {
    CollectorConfig config;
    config.endpoint_url = "http://127.0.0.1:1/v1/chat/completions";  // never reached in dry runs
    config.model_id = "m";
    config.usage_field_map = provider_field_map("openai");
    return config;
}

class FakeChatServer {
public:
    FakeChatServer() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            int n = ++requests_;
            {
                std::lock_guard lock(mutex_);
                int now = ++in_flight_;
                peak_in_flight_ = std::max(peak_in_flight_, now);
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
            if (n <= fail_first_n_) {
                res.status = 503;
            } else if (unauthorized_) {
                res.status = 401;
            } else {
                auto body = nlohmann::json::parse(req.body);
                int text_len = static_cast<int>(body.at("messages")[0].at("content").get<std::string>().size());
                res.set_content(canned_usage(text_len, 100, 60).dump(), "application/json");
            }
            std::lock_guard lock(mutex_);
            --in_flight_;
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~FakeChatServer() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }

    int fail_first_n_ = 0;
    bool unauthorized_ = false;
    std::atomic<int> requests_{0};
    int peak_in_flight_ = 0;

private:
    httplib::Server server_;
    std::thread thread_;
    std::mutex mutex_;
    int in_flight_ = 0;
    int port_ = 0;
};

}  // namespace

TEST_CASE("json path walking") {
    nlohmann::json doc = canned_usage(10, 100, 60);
    REQUIRE(json_path_get(doc, "usage.prompt_tokens") != nullptr);
    CHECK(json_path_get(doc, "usage.prompt_tokens")->get<int>() == 10);
    CHECK(json_path_get(doc, "usage.completion_tokens_details.reasoning_tokens")->get<int>() == 60);
    CHECK(json_path_get(doc, "usage.missing") == nullptr);
    CHECK(json_path_get(doc, "nope.nope") == nullptr);
}

TEST_CASE("provider presets cover the catalog families") {
    for (const char* provider : {"OpenAI", "Google", "Anthropic", "Moonshot AI", "MiniMax"}) {
        auto map = provider_field_map(provider);
        CHECK(map.count("prompt_tokens") == 1);
        CHECK(map.count("output_tokens") == 1);
        CHECK(map.count("thinking_tokens") == 1);
    }
    CHECK_THROWS_AS(provider_field_map("unknown"), NotFoundError);
}

TEST_CASE("dry run maps canned usage fields into a record") {
    TempDir dir;
    std::ofstream(dir.path / "q1.json") << canned_usage(10, 100, 60).dump();

    CollectOptions options;
    options.dry_run_dir = dir.path;
    auto result = collect(base_config(), std::vector<CollectQuery>{{"q1", "d", "what is 2+2"}}, 1, options);

    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].prompt_tokens == 10);
    CHECK(result.records[0].output_tokens == 100);
    CHECK(result.records[0].thinking_tokens == 60);
    CHECK(result.records[0].trial_index == 0);
    CHECK(result.records[0].timestamp.has_value());
    CHECK(result.failures.empty());
}

TEST_CASE("a canned response without the reasoning path defaults thinking to zero") {
    TempDir dir;
    std::ofstream(dir.path / "q1.json") << canned_usage(10, 100, 0, /*with_reasoning=*/false).dump();

    CollectOptions options;
    options.dry_run_dir = dir.path;
    auto result = collect(base_config(), std::vector<CollectQuery>{{"q1", "d", "text"}}, 1, options);
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].thinking_tokens == 0);
    CHECK(result.missing_thinking == 1);
}

TEST_CASE("six trials produce trial indices 0 through 5") {
    TempDir dir;
    std::ofstream(dir.path / "q1.json") << canned_usage(5, 50, 20).dump();

    CollectOptions options;
    options.dry_run_dir = dir.path;
    auto result = collect(base_config(), std::vector<CollectQuery>{{"q1", "d", "text"}}, 6, options);
    REQUIRE(result.records.size() == 6);
    std::set<int> trials;
    for (const auto& rec : result.records) trials.insert(rec.trial_index);
    CHECK(trials == std::set<int>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("per-trial canned files override the per-query file") {
    TempDir dir;
    std::ofstream(dir.path / "q1.json") << canned_usage(5, 50, 20).dump();
    std::ofstream(dir.path / "q1_t1.json") << canned_usage(7, 70, 30).dump();

    CollectOptions options;
    options.dry_run_dir = dir.path;
    auto result = collect(base_config(), std::vector<CollectQuery>{{"q1", "d", "text"}}, 2, options);
    REQUIRE(result.records.size() == 2);
    for (const auto& rec : result.records) {
        CHECK(rec.prompt_tokens == (rec.trial_index == 1 ? 7 : 5));
    }
}

TEST_CASE("a missing canned file becomes a failure, not a partial record") {
    TempDir dir;
    std::ofstream(dir.path / "q1.json") << canned_usage(5, 50, 20).dump();

    CollectOptions options;
    options.dry_run_dir = dir.path;
    std::vector<CollectQuery> queries{{"q1", "d", "a"}, {"q2", "d", "b"}};
    auto result = collect(base_config(), queries, 2, options);
    CHECK(result.records.size() == 2);
    CHECK(result.failures.size() == 2);
    CHECK(result.records.size() + result.failures.size() == queries.size() * 2);
}

TEST_CASE("a canned response missing a required mapped path is a failure") {
    TempDir dir;
    std::ofstream(dir.path / "q1.json") << nlohmann::json{{"usage", {{"prompt_tokens", 3}}}}.dump();

    CollectOptions options;
    options.dry_run_dir = dir.path;
    auto result = collect(base_config(), std::vector<CollectQuery>{{"q1", "d", "x"}}, 1, options);
    CHECK(result.records.empty());
    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures[0].reason.find("output_tokens") != std::string::npos);
}

TEST_CASE("live collection against a local server with bounded concurrency") {
    FakeChatServer server;
    CollectorConfig config = base_config();
    config.endpoint_url = server.url();
    config.credential_env = "";  // no auth for the fake server
    config.max_in_flight = 3;
    config.generation_params = {{"temperature", 0.2}, {"top_p", 1.0}};

    std::vector<CollectQuery> queries;
    for (int i = 0; i < 8; ++i) queries.push_back({"q" + std::to_string(i), "d", "text-" + std::to_string(i)});

    auto result = collect(config, queries, 2, {});
    CHECK(result.records.size() == 16);
    CHECK(result.failures.empty());
    CHECK(server.peak_in_flight_ <= 3);

    // usage passthrough: prompt tokens mirror the text length the server saw
    for (const auto& rec : result.records) {
        CHECK(rec.prompt_tokens >= 6);
        CHECK(rec.output_tokens == 100);
        CHECK(rec.thinking_tokens == 60);
    }
}

TEST_CASE("transient failures are retried; exhaustion is recorded") {
    FakeChatServer server;
    server.fail_first_n_ = 1;
    CollectorConfig config = base_config();
    config.endpoint_url = server.url();
    config.credential_env = "";
    config.retry.backoff_base = std::chrono::milliseconds(1);

    auto ok = collect(config, std::vector<CollectQuery>{{"q1", "d", "x"}}, 1, {});
    CHECK(ok.records.size() == 1);
    CHECK(ok.failures.empty());

    server.fail_first_n_ = 1000;
    auto exhausted = collect(config, std::vector<CollectQuery>{{"q2", "d", "y"}}, 1, {});
    CHECK(exhausted.records.empty());
    REQUIRE(exhausted.failures.size() == 1);
    CHECK(exhausted.failures[0].reason.find("retry exhaustion") != std::string::npos);
}

TEST_CASE("authentication failures are not retried") {
    FakeChatServer server;
    server.unauthorized_ = true;
    CollectorConfig config = base_config();
    config.endpoint_url = server.url();
    config.credential_env = "";
    config.retry.backoff_base = std::chrono::milliseconds(1);

    auto result = collect(config, std::vector<CollectQuery>{{"q1", "d", "x"}}, 1, {});
    CHECK(result.records.empty());
    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures[0].reason.find("authentication") != std::string::npos);
    CHECK(server.requests_.load() == 1);
}

TEST_CASE("a max-spend budget aborts and accounts for skipped jobs") {
    TempDir dir;
    // 1M output tokens at $2/MTok: $2 per call
    std::ofstream(dir.path / "q.json") << canned_usage(0, 1'000'000, 0, false).dump();

    auto pricing = testing::make_pricing("m", 1.0, 2.0);
    CollectorConfig config = base_config();
    config.max_in_flight = 1;  // deterministic sequencing
    CollectOptions options;
    options.dry_run_dir = dir.path;
    options.pricing = &pricing;
    options.max_spend_usd = 3.0;

    std::vector<CollectQuery> queries;
    for (int i = 0; i < 5; ++i) queries.push_back({"q", "d" + std::to_string(i), "x"});
    auto result = collect(config, queries, 1, options);
    CHECK(result.aborted_on_budget);
    CHECK(result.records.size() == 2);  // $4 accumulated after the second call
    CHECK(result.failures.size() == 3);
    CHECK(result.records.size() + result.failures.size() == 5);
}

TEST_CASE("re-appending collected records trips the ledger uniqueness invariant") {
    TempDir dir;
    std::ofstream(dir.path / "q1.json") << canned_usage(1, 2, 0, false).dump();
    CollectOptions options;
    options.dry_run_dir = dir.path;
    auto result = collect(base_config(), std::vector<CollectQuery>{{"q1", "d", "x"}}, 1, options);
    REQUIRE(result.records.size() == 1);

    Ledger ledger;
    ledger.append(result.records[0]);
    CHECK_THROWS_AS(ledger.append(result.records[0]), ValidationError);
}

TEST_CASE("collector config loads presets and overrides") {
    TempDir dir;
    auto path = dir.path / "config.json";
    std::ofstream(path) << R"({
        "endpoint_url": "http://example.test/v1/chat/completions",
        "model_id": "Kimi K2.5",
        "provider": "Moonshot AI",
        "usage_field_map": {"thinking_tokens": "usage.custom.reasoning"},
        "generation_params": {"temperature": 1.0, "top_p": 0.95},
        "max_in_flight": 2,
        "retry": {"max_attempts": 5, "backoff_ms": 10}
    })";
    CollectorConfig config = load_collector_config(path);
    CHECK(config.model_id == "Kimi K2.5");
    CHECK(config.usage_field_map.at("prompt_tokens") == "usage.prompt_tokens");
    CHECK(config.usage_field_map.at("thinking_tokens") == "usage.custom.reasoning");
    CHECK(config.retry.max_attempts == 5);
    CHECK(config.max_in_flight == 2);
    CHECK(config.generation_params.at("temperature").get<double>() == 1.0);
}

TEST_CASE("collector config without the required usage fields is rejected") {
    TempDir dir;
    auto path = dir.path / "config.json";
    std::ofstream(path) << R"({
        "endpoint_url": "http://example.test/x",
        "model_id": "m",
        "usage_field_map": {"prompt_tokens": "usage.prompt_tokens"}
    })";
    CHECK_THROWS_AS(load_collector_config(path), ValidationError);
}

TEST_CASE("query files load and validate") {
    TempDir dir;
    auto path = dir.path / "queries.jsonl";
    std::ofstream(path) << R"({"query_id":"a","dataset_id":"d","text":"t1"})" << "\n"
                        << R"({"query_id":"b","dataset_id":"d","text":"t2"})" << "\n";
    auto queries = load_collect_queries(path);
    REQUIRE(queries.size() == 2);
    CHECK(queries[1].text == "t2");

    std::ofstream(path) << "{\"query_id\":\"a\"}\n";
    CHECK_THROWS_AS(load_collect_queries(path), ParseError);
}
