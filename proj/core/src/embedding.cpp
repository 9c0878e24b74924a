#include "costaudit/embedding.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "costaudit/errors.hpp"
#include "http_util.hpp"
#include "text_util.hpp"

namespace costaudit {

namespace {

std::vector<double> parse_cache_vector(std::string_view line, std::string& hash_out) {
    auto fields = detail::split_csv_line(line);
    if (fields.size() < 3) throw ParseError("cache line has fewer than 3 fields");
    hash_out = fields[0];
    std::size_t dim = std::stoul(fields[1]);
    if (fields.size() != dim + 2) {
        throw ParseError("cache line dimension " + fields[1] + " does not match " +
                         std::to_string(fields.size() - 2) + " values");
    }
    std::vector<double> vec;
    vec.reserve(dim);
    for (std::size_t i = 2; i < fields.size(); ++i) vec.push_back(std::stod(fields[i]));
    return vec;
}

std::string render_cache_line(const std::string& hash, const std::vector<double>& vec) {
    std::ostringstream os;
    os << hash << ',' << vec.size();
    char buf[40];
    for (double v : vec) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << ',' << buf;
    }
    return os.str();
}

}  // namespace

EmbeddingProvider::EmbeddingProvider(EmbeddingProviderConfig config) : config_(std::move(config)) {
    if (config_.cache_path.empty()) return;
    std::ifstream in(config_.cache_path);
    if (!in) return;  // a missing cache file simply starts empty
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        std::string hash;
        std::vector<double> vec;
        try {
            vec = parse_cache_vector(line, hash);
        } catch (const std::exception& e) {
            throw ParseError("embedding cache " + config_.cache_path.string() + " line " +
                             std::to_string(line_no) + ": " + e.what());
        }
        if (dimension_ == 0) {
            dimension_ = vec.size();
        } else if (vec.size() != dimension_) {
            throw ValidationError("embedding cache dimension drift at line " + std::to_string(line_no) + ": " +
                                  std::to_string(vec.size()) + " vs " + std::to_string(dimension_));
        }
        cache_[hash] = std::move(vec);
    }
}

std::string EmbeddingProvider::content_hash(std::string_view text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::vector<double> EmbeddingProvider::get(std::string_view text) {
    std::string hash = content_hash(text);
    {
        std::lock_guard lock(mutex_);
        auto it = cache_.find(hash);
        if (it != cache_.end()) return it->second;
    }
    if (config_.offline) {
        throw NotFoundError("offline miss: no cached embedding for hash " + hash);
    }
    std::vector<double> vec = fetch(text);
    {
        std::lock_guard lock(mutex_);
        if (dimension_ == 0) {
            dimension_ = vec.size();
        } else if (vec.size() != dimension_) {
            throw ValidationError("embedding dimension drift: provider returned " + std::to_string(vec.size()) +
                                  ", cache holds " + std::to_string(dimension_));
        }
        remember(hash, vec);
    }
    return vec;
}

std::vector<double> EmbeddingProvider::fetch(std::string_view text) {
    if (config_.endpoint_url.empty()) {
        throw ValidationError("no embedding endpoint configured");
    }
    auto url = detail::split_url(config_.endpoint_url);
    nlohmann::json body;
    body["input"] = std::string(text);
    if (!config_.model.empty()) body["model"] = config_.model;

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(config_.backoff_base * (1 << (attempt - 2)));
        }
        httplib::Client client(url.base);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        auto res = client.Post(url.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        try {
            auto doc = nlohmann::json::parse(res->body);
            const nlohmann::json* arr = nullptr;
            if (doc.contains("embedding") && doc["embedding"].is_array()) {
                arr = &doc["embedding"];
            } else if (doc.contains("data") && doc["data"].is_array() && !doc["data"].empty() &&
                       doc["data"][0].contains("embedding")) {
                arr = &doc["data"][0]["embedding"];
            }
            if (!arr) {
                last_error = "response carries no embedding array";
                continue;
            }
            std::lock_guard lock(mutex_);
            ++network_calls_;
            return arr->get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("bad response JSON: ") + e.what();
        }
    }
    throw Error("embedding fetch failed after " + std::to_string(config_.max_attempts) +
                " attempts: " + last_error);
}

void EmbeddingProvider::remember(const std::string& hash, const std::vector<double>& vec) {
    cache_[hash] = vec;
    if (config_.cache_path.empty()) return;
    std::ofstream out(config_.cache_path, std::ios::app);
    if (!out) throw IoError("cannot append to embedding cache " + config_.cache_path.string());
    out << render_cache_line(hash, vec) << '\n';
}

std::size_t EmbeddingProvider::dimension() const {
    std::lock_guard lock(mutex_);
    return dimension_;
}

std::size_t EmbeddingProvider::cache_size() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

std::size_t EmbeddingProvider::network_calls() const {
    std::lock_guard lock(mutex_);
    return network_calls_;
}

void attach_embeddings(std::vector<LabeledQuery>& queries, const Ledger& ledger, EmbeddingProvider& provider) {
    for (auto& q : queries) {
        if (q.embedding) continue;
        const std::string* text = nullptr;
        for (const UsageRecord* rec : ledger.query_records(q.model_id, q.dataset_id, q.query_id)) {
            if (rec->query_text) {
                text = &*rec->query_text;
                break;
            }
        }
        if (!text) {
            throw NotFoundError("query text unavailable for (" + q.model_id + ", " + q.dataset_id + ", " +
                                q.query_id + "); cannot embed");
        }
        q.embedding = provider.get(*text);
    }
}

}  // namespace costaudit
