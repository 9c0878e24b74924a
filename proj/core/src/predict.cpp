#include "costaudit/predict.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "costaudit/cost.hpp"
#include "costaudit/errors.hpp"

namespace costaudit {

namespace {

std::uint32_t fnv1a32(std::string_view text) {
    std::uint32_t h = 2166136261u;
    for (unsigned char c : text) {
        h ^= c;
        h *= 16777619u;
    }
    return h;
}

std::mt19937_64 stratum_engine(std::uint64_t seed, std::string_view stratum) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), fnv1a32(stratum)};
    return std::mt19937_64(seq);
}

}  // namespace

Split stratified_split(std::span<const LabeledQuery> queries, const SplitSpec& spec) {
    if (queries.empty()) throw ValidationError("cannot split an empty query collection");
    if (!(spec.test_ratio > 0.0 && spec.test_ratio < 1.0)) {
        throw ValidationError("test_ratio must lie in (0, 1)");
    }

    std::map<std::string, std::vector<const LabeledQuery*>, std::less<>> strata;
    for (const auto& q : queries) strata[q.dataset_id].push_back(&q);

    Split split;
    for (auto& [dataset, members] : strata) {
        if (members.size() < 2) {
            throw ValidationError("stratum '" + dataset + "' has a single query; cannot split");
        }
        // Canonical order first, so the shuffle depends only on content.
        std::sort(members.begin(), members.end(), [](const LabeledQuery* a, const LabeledQuery* b) {
            return std::tie(a->query_id, a->model_id) < std::tie(b->query_id, b->model_id);
        });
        auto engine = stratum_engine(spec.seed, dataset);
        std::shuffle(members.begin(), members.end(), engine);

        auto test_count = static_cast<std::size_t>(
            std::llround(static_cast<double>(members.size()) * spec.test_ratio));
        test_count = std::max<std::size_t>(test_count, 1);
        for (std::size_t i = 0; i < members.size(); ++i) {
            (i < test_count ? split.test : split.train).push_back(*members[i]);
        }
    }
    return split;
}

double predict_mean(std::span<const LabeledQuery> train, const LabeledQuery& query) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& q : train) {
        if (q.model_id != query.model_id) continue;
        sum += q.actual_cost;
        ++n;
    }
    if (n == 0) throw NotFoundError("empty training set for model '" + query.model_id + "'");
    return sum / static_cast<double>(n);
}

std::map<std::string, LinearModel, std::less<>> fit_prompt_length_lr(std::span<const LabeledQuery> train) {
    if (train.empty()) throw NotFoundError("empty training set");
    struct Accum {
        double sx = 0, sy = 0;
        std::size_t n = 0;
        std::vector<const LabeledQuery*> rows;
    };
    std::map<std::string, Accum, std::less<>> by_model;
    for (const auto& q : train) {
        auto& acc = by_model[q.model_id];
        acc.sx += static_cast<double>(q.prompt_tokens);
        acc.sy += q.actual_cost;
        acc.n += 1;
        acc.rows.push_back(&q);
    }

    std::map<std::string, LinearModel, std::less<>> models;
    for (auto& [model_id, acc] : by_model) {
        double mean_x = acc.sx / static_cast<double>(acc.n);
        double mean_y = acc.sy / static_cast<double>(acc.n);
        double sxx = 0, sxy = 0;
        for (const LabeledQuery* q : acc.rows) {
            double dx = static_cast<double>(q->prompt_tokens) - mean_x;
            sxx += dx * dx;
            sxy += dx * (q->actual_cost - mean_y);
        }
        LinearModel lm;
        if (sxx == 0) {
            lm.mean_fallback = true;
            lm.intercept = mean_y;
        } else {
            lm.slope = sxy / sxx;
            lm.intercept = mean_y - lm.slope * mean_x;
        }
        models[model_id] = lm;
    }
    return models;
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ValidationError("embedding dimension mismatch: " + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    }
    if (a.empty()) throw ValidationError("empty embedding");
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) throw ValidationError("zero-norm embedding");
    return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

double predict_knn(std::span<const LabeledQuery> train, const LabeledQuery& query, const KnnOptions& options) {
    if (options.k < 1) throw ValidationError("k must be at least 1");
    if (!query.embedding) throw ValidationError("query '" + query.query_id + "' has no embedding");

    struct Neighbor {
        double distance;
        const LabeledQuery* q;
    };
    std::vector<Neighbor> neighbors;
    for (const auto& q : train) {
        if (q.model_id != query.model_id) continue;
        if (!q.embedding) continue;
        neighbors.push_back({cosine_distance(*q.embedding, *query.embedding), &q});
    }
    if (neighbors.size() < static_cast<std::size_t>(options.k)) {
        throw ValidationError("insufficient neighbors for model '" + query.model_id + "': need " +
                              std::to_string(options.k) + ", have " + std::to_string(neighbors.size()));
    }
    std::sort(neighbors.begin(), neighbors.end(), [](const Neighbor& a, const Neighbor& b) {
        return std::tie(a.distance, a.q->query_id) < std::tie(b.distance, b.q->query_id);
    });

    if (!options.distance_weighted) {
        double sum = 0;
        for (int i = 0; i < options.k; ++i) sum += neighbors[i].q->actual_cost;
        return sum / static_cast<double>(options.k);
    }
    double wsum = 0, sum = 0;
    for (int i = 0; i < options.k; ++i) {
        double w = 1.0 / (neighbors[i].distance + 1e-12);
        wsum += w;
        sum += w * neighbors[i].q->actual_cost;
    }
    return sum / wsum;
}

double evaluate_mae(std::span<const PredictionPair> pairs) {
    if (pairs.empty()) throw ValidationError("cannot evaluate MAE over an empty prediction list");
    double sum = 0;
    for (const auto& p : pairs) sum += std::abs(p.predicted - p.actual);
    return sum / static_cast<double>(pairs.size());
}

std::string_view baseline_name(Baseline baseline) {
    switch (baseline) {
        case Baseline::mean: return "mean";
        case Baseline::prompt_length_lr: return "prompt_length_lr";
        case Baseline::embedding_knn: return "embedding_knn";
    }
    return "unknown";
}

std::vector<LabeledQuery> labeled_queries(const Ledger& ledger, const PricingCatalog& catalog,
                                          std::string_view model_id) {
    const ModelPricing& pricing = catalog.pricing(model_id);
    std::vector<LabeledQuery> out;
    for (const auto& rec : ledger.records()) {
        if (rec.model_id != model_id || rec.trial_index != 0) continue;
        LabeledQuery q;
        q.query_id = rec.query_id;
        q.dataset_id = rec.dataset_id;
        q.model_id = rec.model_id;
        q.prompt_tokens = rec.prompt_tokens;
        q.actual_cost = query_cost_usd(pricing, rec);
        out.push_back(std::move(q));
    }
    return out;
}

PredictionReport run_baseline(std::span<const LabeledQuery> queries, Baseline baseline, const SplitSpec& spec,
                              const KnnOptions& knn) {
    if (queries.empty()) throw ValidationError("no labeled queries");
    for (const auto& q : queries) {
        if (q.model_id != queries.front().model_id) {
            throw ValidationError("run_baseline expects queries of a single model; found '" + q.model_id +
                                  "' and '" + queries.front().model_id + "'");
        }
    }

    Split split = stratified_split(queries, spec);
    PredictionReport report;
    report.model_id = queries.front().model_id;
    report.baseline = baseline;
    if (baseline == Baseline::embedding_knn) report.k = knn.k;

    std::map<std::string, LinearModel, std::less<>> lr;
    if (baseline == Baseline::prompt_length_lr) lr = fit_prompt_length_lr(split.train);

    std::map<std::string, std::vector<PredictionPair>, std::less<>> by_dataset;
    for (const auto& q : split.test) {
        double predicted = 0;
        switch (baseline) {
            case Baseline::mean: predicted = predict_mean(split.train, q); break;
            case Baseline::prompt_length_lr: predicted = lr.at(q.model_id).predict(q.prompt_tokens); break;
            case Baseline::embedding_knn: predicted = predict_knn(split.train, q, knn); break;
        }
        PredictionPair pair{q.query_id, predicted, q.actual_cost};
        by_dataset[q.dataset_id].push_back(pair);
        report.per_query.push_back(std::move(pair));
    }
    report.mae = evaluate_mae(report.per_query);
    for (const auto& [dataset, pairs] : by_dataset) {
        report.per_dataset_mae[dataset] = evaluate_mae(pairs);
    }
    return report;
}

}  // namespace costaudit
