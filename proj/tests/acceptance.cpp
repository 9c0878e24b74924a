// Acceptance suite: every release gate runs against the bundled fixture or a
// generated micro-fixture and prints one PASS/FAIL line per criterion.

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "costaudit/cost.hpp"
#include "costaudit/fixtures.hpp"
#include "costaudit/predict.hpp"
#include "costaudit/ranking.hpp"
#include "costaudit/variance.hpp"

using namespace costaudit;

namespace {

int failures = 0;
std::vector<std::string> current_issues;

void expect(bool ok, const std::string& what) {
    if (!ok) current_issues.push_back(what);
}

void expect_near(double actual, double expected, double tolerance, const std::string& what) {
    if (!(std::abs(actual - expected) <= tolerance)) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s: got %.6f, want %.6f +/- %g", what.c_str(), actual, expected,
                      tolerance);
        current_issues.push_back(buf);
    }
}

void criterion(int number, const std::string& name, const std::function<void()>& body) {
    current_issues.clear();
    try {
        body();
    } catch (const std::exception& e) {
        current_issues.push_back(std::string("exception: ") + e.what());
    }
    if (current_issues.empty()) {
        std::printf("PASS  criterion %2d: %s\n", number, name.c_str());
    } else {
        ++failures;
        std::printf("FAIL  criterion %2d: %s\n", number, name.c_str());
        for (const auto& issue : current_issues) std::printf("      - %s\n", issue.c_str());
    }
}

ModelPricing pricing_of(double input_usd, double output_usd) {
    ModelPricing p;
    p.model_id = "m";
    p.provider = "t";
    p.input_price_per_mtok = {static_cast<std::int64_t>(input_usd * 1e6 + 0.5)};
    p.output_price_per_mtok = {static_cast<std::int64_t>(output_usd * 1e6 + 0.5)};
    p.snapshot_date = {2026, 2, 28};
    return p;
}

UsageRecord record_of(std::string id, std::int64_t prompt, std::int64_t output, std::int64_t thinking) {
    UsageRecord r;
    r.record_id = std::move(id);
    r.model_id = "m";
    r.dataset_id = "d";
    r.query_id = r.record_id;
    r.prompt_tokens = prompt;
    r.output_tokens = output;
    r.thinking_tokens = thinking;
    return r;
}

const ReversalPair* find_pair(const std::vector<ReversalPair>& pairs, const std::string& cheap,
                              const std::string& pricey) {
    for (const auto& p : pairs) {
        if (p.cheaper_listed_model == cheap && p.pricier_listed_model == pricey) return &p;
    }
    return nullptr;
}

}  // namespace

int main() {
    PricingCatalog catalog = fixtures::load_catalog();
    Ledger ledger = fixtures::load_ledger();

    criterion(1, "pooled reversal rate 55/252 = 0.2183", [&] {
        auto all = compare_rankings(catalog, ledger, "ALL", CostMode::actual);
        expect(all.reversal_count == 55, "reversal count " + std::to_string(all.reversal_count) + " != 55");
        expect(all.pair_count == 252, "pair count " + std::to_string(all.pair_count) + " != 252");
        expect_near(all.reversal_rate, 0.2183, 1e-4, "reversal rate");
    });

    criterion(2, "per-task extremes: ArenaHard 3 (10.7%), MMLUPro 9 (32.1%)", [&] {
        auto arena = compare_rankings(catalog, ledger, "ArenaHard", CostMode::actual);
        auto mmlu = compare_rankings(catalog, ledger, "MMLUPro", CostMode::actual);
        expect(arena.reversal_count == 3, "ArenaHard count " + std::to_string(arena.reversal_count) + " != 3");
        expect(mmlu.reversal_count == 9, "MMLUPro count " + std::to_string(mmlu.reversal_count) + " != 9");
        expect_near(arena.reversal_rate, 0.107, 1e-3, "ArenaHard rate");
        expect_near(mmlu.reversal_rate, 0.321, 1e-3, "MMLUPro rate");
    });

    criterion(3, "severity of the headline MMLUPro reversals", [&] {
        auto mmlu = compare_rankings(catalog, ledger, "MMLUPro", CostMode::actual);
        const ReversalPair* flash_haiku = find_pair(mmlu.reversal_pairs, "Gemini 3 Flash", "Claude Haiku 4.5");
        const ReversalPair* flash_gpt = find_pair(mmlu.reversal_pairs, "Gemini 3 Flash", "GPT-5.2");
        expect(flash_haiku != nullptr, "Flash vs Haiku pair missing");
        expect(flash_gpt != nullptr, "Flash vs GPT-5.2 pair missing");
        if (flash_haiku) {
            expect_near(flash_haiku->cost_ratio, 27.99, 0.05, "Flash/Haiku cost ratio");
            expect_near(flash_haiku->price_ratio, 1.714, 0.001, "Flash/Haiku price ratio");
        }
        if (flash_gpt) expect_near(flash_gpt->cost_ratio, 6.24, 0.02, "Flash/GPT-5.2 cost ratio");
    });

    criterion(4, "workload totals: Flash 642.97, GPT-5.2 526.60, ratio 1.221", [&] {
        double flash = 0, gpt = 0;
        for (const auto& dataset : ledger.dataset_ids()) {
            flash += dataset_cost_usd(catalog.pricing("Gemini 3 Flash"), ledger, dataset);
            gpt += dataset_cost_usd(catalog.pricing("GPT-5.2"), ledger, dataset);
        }
        expect_near(flash, 642.97, 0.01, "Gemini 3 Flash total");
        expect_near(gpt, 526.60, 0.01, "GPT-5.2 total");
        expect_near(flash / gpt, 1.221, 0.002, "total ratio");
    });

    criterion(5, "ablation restores ranking: 9->2, tau 0.357->0.857, averages 0.563->0.873, 6.1->1.8", [&] {
        auto actual = compare_rankings(catalog, ledger, "MMLUPro", CostMode::actual);
        auto ablated = compare_rankings(catalog, ledger, "MMLUPro", CostMode::ablated);
        expect(actual.reversal_count == 9, "MMLUPro actual count != 9");
        expect(ablated.reversal_count == 2, "MMLUPro ablated count != 2");
        expect_near(actual.kendall_tau, 0.357, 1e-3, "MMLUPro actual tau");
        expect_near(ablated.kendall_tau, 0.857, 1e-3, "MMLUPro ablated tau");

        double flash_ablated = dataset_ablated_cost_usd(catalog.pricing("Gemini 3 Flash"), ledger, "MMLUPro");
        expect_near(flash_ablated, 5.003, 0.02, "Flash MMLUPro ablated cell");

        auto report = ablation_report(catalog, ledger);
        expect_near(report.avg_tau_actual, 0.563, 0.01, "average tau actual");
        expect_near(report.avg_tau_ablated, 0.873, 0.01, "average tau ablated");
        expect_near(report.avg_reversals_actual, 6.1, 0.05, "average reversals actual");
        expect_near(report.avg_reversals_ablated, 1.8, 0.05, "average reversals ablated");
    });

    criterion(6, "thinking-token aggregates: Flash 208,681k, Opus 24,197k, ratio 8.62", [&] {
        std::int64_t flash = 0, opus = 0;
        for (const auto& row : ledger.aggregate_usage(TrialFilter::originals_only)) {
            if (row.model_id == "Gemini 3 Flash") flash += row.total_thinking_tokens;
            if (row.model_id == "Claude Opus 4.6") opus += row.total_thinking_tokens;
        }
        expect(std::llabs(flash - 208'681'000) <= 1000, "Flash total " + std::to_string(flash));
        expect(std::llabs(opus - 24'197'000) <= 1000, "Opus total " + std::to_string(opus));
        expect_near(static_cast<double>(flash) / static_cast<double>(opus), 8.62, 0.02, "thinking ratio");
    });

    criterion(7, "tau identity holds exactly on 1000 random untied cost vectors", [&] {
        std::map<std::string, double, std::less<>> listed;
        for (const auto& model : catalog.model_ids()) listed[model] = catalog.listed_price_usd(model);
        std::mt19937_64 rng(20260228);
        std::uniform_real_distribution<double> cost(0.01, 1000.0);
        for (int i = 0; i < 1000; ++i) {
            std::map<std::string, double, std::less<>> costs;
            for (const auto& model : catalog.model_ids()) costs[model] = cost(rng);
            double tau = kendall_tau_values(listed, costs);
            double identity = 1.0 - 2.0 * static_cast<double>(find_reversals(catalog, costs).size()) / 28.0;
            if (tau != identity) {
                expect(false, "mismatch at vector " + std::to_string(i));
                return;
            }
        }
    });

    criterion(8, "prediction baselines match independent oracles and degeneracies", [&] {
        // (a) least squares vs normal equations on 50 random points
        std::mt19937_64 rng(99);
        std::uniform_int_distribution<std::int64_t> prompt(1, 200000);
        std::normal_distribution<double> noise(0.0, 0.02);
        std::vector<LabeledQuery> train;
        for (int i = 0; i < 50; ++i) {
            LabeledQuery q;
            q.query_id = "q" + std::to_string(i);
            q.dataset_id = "d";
            q.model_id = "m";
            q.prompt_tokens = prompt(rng);
            q.actual_cost = 2e-6 * static_cast<double>(q.prompt_tokens) + 0.3 + noise(rng);
            train.push_back(std::move(q));
        }
        double n = 50, sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto& q : train) {
            double x = static_cast<double>(q.prompt_tokens);
            sx += x;
            sy += q.actual_cost;
            sxx += x * x;
            sxy += x * q.actual_cost;
        }
        double det = n * sxx - sx * sx;
        double oracle_slope = (n * sxy - sx * sy) / det;
        double oracle_intercept = (sy * sxx - sx * sxy) / det;
        const LinearModel& lm = fit_prompt_length_lr(train).at("m");
        expect(std::abs(lm.slope - oracle_slope) <= 1e-9 * std::abs(oracle_slope), "lr slope vs oracle");
        expect(std::abs(lm.intercept - oracle_intercept) <= 1e-9 * std::abs(oracle_intercept),
               "lr intercept vs oracle");

        // (b) knn vs exhaustive scan on a 20-point corpus, k in {1, 3, 5}
        std::uniform_real_distribution<double> coord(-1.0, 1.0);
        std::vector<LabeledQuery> corpus;
        for (int i = 0; i < 20; ++i) {
            LabeledQuery q;
            q.query_id = "e" + std::to_string(i);
            q.dataset_id = "d";
            q.model_id = "m";
            q.actual_cost = static_cast<double>(1 + i % 6);  // integer costs sum exactly
            std::vector<double> vec(8);
            for (auto& v : vec) v = coord(rng);
            q.embedding = std::move(vec);
            corpus.push_back(std::move(q));
        }
        LabeledQuery probe = corpus[0];
        probe.query_id = "probe";
        {
            std::vector<double> vec(8);
            for (auto& v : vec) v = coord(rng);
            probe.embedding = std::move(vec);
        }
        for (int k : {1, 3, 5}) {
            std::vector<std::pair<double, std::string>> scan;
            std::map<std::string, double> cost_of;
            for (const auto& t : corpus) {
                scan.emplace_back(cosine_distance(*t.embedding, *probe.embedding), t.query_id);
                cost_of[t.query_id] = t.actual_cost;
            }
            std::sort(scan.begin(), scan.end());
            double oracle = 0;
            for (int i = 0; i < k; ++i) oracle += cost_of[scan[i].second];
            oracle /= k;
            expect(predict_knn(corpus, probe, {k}) == oracle, "knn vs oracle at k=" + std::to_string(k));
        }

        // (c) knn over the whole training set equals the mean baseline
        expect(predict_knn(corpus, probe, {static_cast<int>(corpus.size())}) == predict_mean(corpus, probe),
               "knn with k=|train| vs mean baseline");

        // (d) deterministic stratified split with exact per-stratum counts
        std::vector<LabeledQuery> pool;
        for (const char* dataset : {"a", "b", "c"}) {
            for (int i = 0; i < 10; ++i) {
                LabeledQuery q;
                q.query_id = std::string(dataset) + std::to_string(i);
                q.dataset_id = dataset;
                q.model_id = "m";
                q.actual_cost = i;
                pool.push_back(std::move(q));
            }
        }
        Split s1 = stratified_split(pool, {0.2, 7});
        Split s2 = stratified_split(pool, {0.2, 7});
        expect(s1.test.size() == 6 && s1.train.size() == 24, "split sizes");
        bool same = s1.test.size() == s2.test.size();
        for (std::size_t i = 0; same && i < s1.test.size(); ++i) {
            same = s1.test[i].query_id == s2.test[i].query_id;
        }
        expect(same, "split determinism under a fixed seed");
        for (const char* dataset : {"a", "b", "c"}) {
            auto count = std::count_if(s1.test.begin(), s1.test.end(),
                                       [&](const LabeledQuery& q) { return q.dataset_id == dataset; });
            expect(count == 2, std::string("per-stratum test count for ") + dataset);
        }
    });

    criterion(9, "variance statistics and exact scale invariance", [&] {
        std::vector<double> constant{5, 5, 5};
        expect(within_query_stats(constant).cv == 0.0, "cv(5,5,5)");
        std::vector<double> two{2, 4};
        expect_near(within_query_stats(two).cv, 0.4714, 1e-4, "cv(2,4)");
        std::vector<double> extreme{562, 11000};
        expect_near(within_query_stats(extreme).max_min_ratio, 19.57, 0.01, "ratio(562,11000)");

        for (double lambda : {0.5, 3.0, 10.0}) {
            for (const auto& base : {std::vector<double>{5, 5, 5}, {2, 4}, {562, 11000}}) {
                std::vector<double> scaled;
                for (double v : base) scaled.push_back(lambda * v);
                WithinQueryStats a = within_query_stats(base);
                WithinQueryStats b = within_query_stats(scaled);
                expect(a.cv == b.cv, "cv scale invariance at lambda " + std::to_string(lambda));
                expect(a.max_min_ratio == b.max_min_ratio,
                       "ratio scale invariance at lambda " + std::to_string(lambda));
            }
        }
    });

    criterion(10, "cost linearity, breakdown closure, and the ablation bound on 100 random records", [&] {
        std::mt19937_64 rng(7);
        std::uniform_int_distribution<std::int64_t> prompt(0, 1'000'000);
        std::uniform_int_distribution<std::int64_t> output(1, 2'000'000);
        ModelPricing pricing = pricing_of(0.60, 3.00);

        std::vector<UsageRecord> records;
        for (int i = 0; i < 100; ++i) {
            std::int64_t out = output(rng);
            std::uniform_int_distribution<std::int64_t> think(0, out);
            std::int64_t thinking = (i % 10 == 0) ? 0 : think(rng);  // keep both branches populated
            records.push_back(record_of("r" + std::to_string(i), prompt(rng), out, thinking));
        }

        double direct = 0;
        for (const auto& rec : records) direct += query_cost_usd(pricing, rec);
        CostBreakdown b = cost_breakdown(pricing, std::span<const UsageRecord>(records), Scope::dataset);
        expect(std::abs(b.total_cost - direct) <= 1e-9 * direct, "breakdown closure vs per-record sum");
        expect(std::abs(b.prompt_cost + b.thinking_cost + b.generation_cost - b.total_cost) <=
                   1e-12 * b.total_cost,
               "component sum equals total");

        for (const auto& rec : records) {
            double cost = query_cost_usd(pricing, rec);
            double ablated = ablated_cost_usd(pricing, rec);
            expect(ablated <= cost, "ablated <= cost for " + rec.record_id);
            if (rec.thinking_tokens == 0) {
                expect(ablated == cost, "equality at zero thinking for " + rec.record_id);
            } else {
                expect(ablated < cost, "strict inequality for " + rec.record_id);
            }
        }
    });

    if (failures == 0) {
        std::printf("all %d acceptance criteria passed\n", 10);
        return 0;
    }
    std::printf("%d acceptance criteria FAILED\n", failures);
    return 1;
}
