#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "costaudit/ledger.hpp"
#include "costaudit/predict.hpp"

namespace costaudit {

struct EmbeddingProviderConfig {
    std::string endpoint_url;  // e.g. https://host/v1/embeddings
    std::string model;         // passed through when non-empty
    std::string api_key_env = "COSTAUDIT_EMBED_API_KEY";
    std::filesystem::path cache_path;  // empty: in-memory cache only
    bool offline = false;              // never touch the network
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{250};
    int timeout_seconds = 60;
};

// Cache-first text embedding lookup keyed by a content hash. Remote fetches
// append to the cache file; entries are (hash, dimension, vector) lines.
// One writer at a time; readers only ever see fully written lines.
class EmbeddingProvider {
public:
    explicit EmbeddingProvider(EmbeddingProviderConfig config);

    // Cached vector if present, otherwise a remote fetch (unless offline).
    std::vector<double> get(std::string_view text);

    static std::string content_hash(std::string_view text);  // sha-256 hex

    // 0 until the first vector is seen; fixed afterwards.
    std::size_t dimension() const;
    std::size_t cache_size() const;
    std::size_t network_calls() const;

private:
    std::vector<double> fetch(std::string_view text);
    void remember(const std::string& hash, const std::vector<double>& vec);

    EmbeddingProviderConfig config_;
    mutable std::mutex mutex_;
    std::map<std::string, std::vector<double>, std::less<>> cache_;
    std::size_t dimension_ = 0;
    std::size_t network_calls_ = 0;
};

// Fills each query's embedding from the text recorded in the ledger.
// Throws NotFoundError when a query has no recorded text.
void attach_embeddings(std::vector<LabeledQuery>& queries, const Ledger& ledger, EmbeddingProvider& provider);

}  // namespace costaudit
