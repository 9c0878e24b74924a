// costaudit: audits what reasoning-model API calls actually cost, versus
// what the listed prices suggest.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "costaudit/catalog.hpp"
#include "costaudit/collect.hpp"
#include "costaudit/cost.hpp"
#include "costaudit/embedding.hpp"
#include "costaudit/errors.hpp"
#include "costaudit/fixtures.hpp"
#include "costaudit/ledger.hpp"
#include "costaudit/money.hpp"
#include "costaudit/predict.hpp"
#include "costaudit/ranking.hpp"
#include "costaudit/report.hpp"
#include "costaudit/variance.hpp"
#include "costaudit/version.hpp"

namespace {

using costaudit::Baseline;
using costaudit::CostMode;
using costaudit::Ledger;
using costaudit::PricingCatalog;
using costaudit::ReportEnvelope;
using costaudit::ReportFormat;
using costaudit::TextTable;
using costaudit::UsageRecord;
using ojson = nlohmann::ordered_json;

struct CommonOptions {
    std::string catalog_path;
    std::string ledger_path;
    bool paper_fixture = false;
    std::string format = "json";
    int decimals = 4;
    bool lenient = false;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opts, bool needs_ledger = true) {
    cmd->add_option("--catalog", opts.catalog_path, "Pricing catalog file (CSV or JSON)");
    if (needs_ledger) cmd->add_option("--ledger", opts.ledger_path, "Usage record file (JSONL or CSV)");
    cmd->add_flag("--paper-fixture", opts.paper_fixture, "Use the bundled pricing and usage fixture");
    cmd->add_option("--format", opts.format, "Output format: json, table, or csv")->default_val("json");
    cmd->add_option("--decimals", opts.decimals, "Decimals for monetary values in machine output")
        ->default_val(4);
    cmd->add_flag("--lenient", opts.lenient, "Skip invalid ledger lines instead of rejecting the file");
}

PricingCatalog load_catalog(const CommonOptions& opts) {
    if (opts.paper_fixture) {
        if (!opts.catalog_path.empty()) {
            throw costaudit::ValidationError("conflicting flags: --paper-fixture and --catalog");
        }
        return costaudit::fixtures::load_catalog();
    }
    if (opts.catalog_path.empty()) {
        throw costaudit::ValidationError("either --catalog or --paper-fixture is required");
    }
    PricingCatalog catalog = PricingCatalog::load(opts.catalog_path);
    for (const auto& warning : catalog.warnings()) {
        std::cerr << "warning: " << opts.catalog_path << ": " << warning << '\n';
    }
    return catalog;
}

Ledger load_ledger(const CommonOptions& opts) {
    if (opts.paper_fixture) {
        if (!opts.ledger_path.empty()) {
            throw costaudit::ValidationError("conflicting flags: --paper-fixture and --ledger");
        }
        return costaudit::fixtures::load_ledger();
    }
    if (opts.ledger_path.empty()) {
        throw costaudit::ValidationError("either --ledger or --paper-fixture is required");
    }
    costaudit::IngestReport report;
    Ledger ledger = Ledger::ingest(opts.ledger_path,
                                   opts.lenient ? costaudit::IngestMode::lenient : costaudit::IngestMode::strict,
                                   &report);
    for (const auto& issue : report.issues) std::cerr << "warning: skipped " << issue << '\n';
    if (report.missing_thinking > 0) {
        std::cerr << "warning: " << opts.ledger_path << ": " << report.missing_thinking
                  << " record(s) without thinking_tokens, defaulted to 0\n";
    }
    if (ledger.empty()) throw costaudit::ValidationError("empty ledger: " + opts.ledger_path);
    return ledger;
}

void emit(const ReportEnvelope& envelope, const TextTable& table, const CommonOptions& opts) {
    switch (costaudit::parse_format(opts.format)) {
        case ReportFormat::json:
            std::cout << envelope.to_json().dump(2) << '\n';
            break;
        case ReportFormat::table:
            std::cout << "costaudit " << envelope.tool_version << " — " << envelope.command << '\n'
                      << "catalog snapshot: " << envelope.catalog_snapshot_date << '\n'
                      << "generated at: " << envelope.generated_at << "\n\n"
                      << table.render_aligned();
            break;
        case ReportFormat::csv:
            std::cout << "# tool_version=" << envelope.tool_version << '\n'
                      << "# command=" << envelope.command << '\n'
                      << "# catalog_snapshot_date=" << envelope.catalog_snapshot_date << '\n'
                      << "# generated_at=" << envelope.generated_at << '\n'
                      << table.render_csv();
            break;
    }
}

std::string money_cell(double usd, int decimals) { return costaudit::format_usd(usd, decimals); }

std::string real_cell(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4f", value);
    return buf;
}

// ---------------------------------------------------------------- audit ---

int cmd_audit(const CommonOptions& opts) {
    PricingCatalog catalog = load_catalog(opts);
    Ledger ledger = load_ledger(opts);

    auto datasets = ledger.dataset_ids();
    ojson payload;
    payload["datasets"] = datasets;
    payload["models"] = ojson::array();

    TextTable table;
    table.columns = {"model"};
    for (const auto& d : datasets) table.columns.push_back(d);
    table.columns.push_back("total");

    for (const auto& model : ledger.model_ids()) {
        const auto& pricing = catalog.pricing(model);
        ojson row;
        row["model_id"] = model;
        row["datasets"] = ojson::object();
        std::vector<std::string> cells{model};
        double total = 0;
        for (const auto& dataset : datasets) {
            if (ledger.cell(model, dataset).empty()) {
                row["datasets"][dataset] = nullptr;
                cells.push_back("");
                continue;
            }
            double cost = costaudit::dataset_cost_usd(pricing, ledger, dataset);
            total += cost;
            row["datasets"][dataset] = costaudit::display_money(cost, opts.decimals);
            cells.push_back(money_cell(cost, opts.format == "table" ? 2 : 4));
        }
        row["total"] = costaudit::display_money(total, opts.decimals);
        cells.push_back(money_cell(total, opts.format == "table" ? 2 : 4));
        payload["models"].push_back(std::move(row));
        table.rows.push_back(std::move(cells));
    }

    ojson params{{"catalog", opts.paper_fixture ? "paper-fixture" : opts.catalog_path},
                 {"ledger", opts.paper_fixture ? "paper-fixture" : opts.ledger_path}};
    ReportEnvelope env = costaudit::make_envelope("audit", catalog, params);
    env.payload = std::move(payload);
    emit(env, table, opts);
    return 0;
}

// ------------------------------------------------------------ reversals ---

ojson pair_to_json(const costaudit::ReversalPair& pair) {
    return ojson{{"task", pair.task_id},
                 {"cheaper_listed_model", pair.cheaper_listed_model},
                 {"pricier_listed_model", pair.pricier_listed_model},
                 {"price_ratio", pair.price_ratio},
                 {"cost_ratio", pair.cost_ratio}};
}

int cmd_reversals(const CommonOptions& opts, const std::string& task, const std::string& cost_mode) {
    PricingCatalog catalog = load_catalog(opts);
    Ledger ledger = load_ledger(opts);
    CostMode mode = cost_mode == "ablated" ? CostMode::ablated : CostMode::actual;

    costaudit::RankingComparison cmp = costaudit::compare_rankings(catalog, ledger, task, mode);

    ojson payload;
    payload["task"] = cmp.task_id;
    payload["cost_mode"] = cost_mode;
    payload["price_ranking"] = cmp.price_ranking;
    payload["cost_ranking"] = cmp.cost_ranking;
    payload["reversal_count"] = cmp.reversal_count;
    payload["pair_count"] = cmp.pair_count;
    payload["reversal_rate"] = cmp.reversal_rate;
    payload["kendall_tau"] = cmp.kendall_tau;
    payload["pairs"] = ojson::array();
    for (const auto& pair : cmp.reversal_pairs) payload["pairs"].push_back(pair_to_json(pair));

    TextTable table;
    table.columns = {"task", "cheaper listed", "pricier listed", "price ratio", "cost ratio"};
    for (const auto& pair : cmp.reversal_pairs) {
        table.rows.push_back({pair.task_id, pair.cheaper_listed_model, pair.pricier_listed_model,
                              real_cell(pair.price_ratio), real_cell(pair.cost_ratio)});
    }
    table.rows.push_back({"(summary)", std::to_string(cmp.reversal_count) + "/" + std::to_string(cmp.pair_count),
                          "rate " + real_cell(cmp.reversal_rate), "tau", real_cell(cmp.kendall_tau)});

    ojson params{{"task", task}, {"cost_mode", cost_mode}};
    ReportEnvelope env = costaudit::make_envelope("reversals", catalog, params);
    env.payload = std::move(payload);
    emit(env, table, opts);
    return 0;
}

// --------------------------------------------------------------- ablate ---

int cmd_ablate(const CommonOptions& opts) {
    PricingCatalog catalog = load_catalog(opts);
    Ledger ledger = load_ledger(opts);

    costaudit::AblationReport report = costaudit::ablation_report(catalog, ledger);

    ojson payload;
    payload["rows"] = ojson::array();
    TextTable table;
    table.columns = {"task", "tau actual", "tau ablated", "reversals actual", "reversals ablated"};
    for (const auto& row : report.rows) {
        payload["rows"].push_back(ojson{{"task", row.task_id},
                                        {"tau_actual", row.tau_actual},
                                        {"tau_ablated", row.tau_ablated},
                                        {"reversals_actual", row.reversals_actual},
                                        {"reversals_ablated", row.reversals_ablated}});
        table.rows.push_back({row.task_id, real_cell(row.tau_actual), real_cell(row.tau_ablated),
                              std::to_string(row.reversals_actual), std::to_string(row.reversals_ablated)});
    }
    payload["average"] = ojson{{"tau_actual", report.avg_tau_actual},
                               {"tau_ablated", report.avg_tau_ablated},
                               {"reversals_actual", report.avg_reversals_actual},
                               {"reversals_ablated", report.avg_reversals_ablated}};
    table.rows.push_back({"(average)", real_cell(report.avg_tau_actual), real_cell(report.avg_tau_ablated),
                          real_cell(report.avg_reversals_actual), real_cell(report.avg_reversals_ablated)});

    ReportEnvelope env = costaudit::make_envelope("ablate", catalog, ojson::object());
    env.payload = std::move(payload);
    emit(env, table, opts);
    return 0;
}

// ------------------------------------------------------------ breakdown ---

int cmd_breakdown(const CommonOptions& opts, const std::string& task) {
    PricingCatalog catalog = load_catalog(opts);
    Ledger ledger = load_ledger(opts);

    bool workload = task.empty() || task == "ALL";
    ojson payload;
    payload["scope"] = workload ? "workload" : "dataset";
    if (!workload) payload["task"] = task;
    payload["models"] = ojson::array();

    TextTable table;
    table.columns = {"model", "prompt cost", "thinking cost", "generation cost", "total cost",
                     "thinking token share", "thinking cost share"};

    bool any = false;
    for (const auto& model : ledger.model_ids()) {
        std::vector<const UsageRecord*> records;
        if (workload) {
            for (const auto& dataset : ledger.dataset_ids()) {
                for (const UsageRecord* rec : ledger.cell(model, dataset)) {
                    if (rec->trial_index == 0) records.push_back(rec);
                }
            }
        } else {
            for (const UsageRecord* rec : ledger.cell(model, task)) {
                if (rec->trial_index == 0) records.push_back(rec);
            }
        }
        if (records.empty()) continue;
        any = true;
        auto breakdown = costaudit::cost_breakdown(catalog.pricing(model), records,
                                                   workload ? costaudit::Scope::workload
                                                            : costaudit::Scope::dataset);
        ojson row;
        row["model_id"] = model;
        row["prompt_cost"] = costaudit::display_money(breakdown.prompt_cost, opts.decimals);
        row["thinking_cost"] = costaudit::display_money(breakdown.thinking_cost, opts.decimals);
        row["generation_cost"] = costaudit::display_money(breakdown.generation_cost, opts.decimals);
        row["total_cost"] = costaudit::display_money(breakdown.total_cost, opts.decimals);
        row["prompt_tokens"] = breakdown.prompt_tokens;
        row["thinking_tokens"] = breakdown.thinking_tokens;
        row["generation_tokens"] = breakdown.generation_tokens;
        std::string token_share_cell, cost_share_cell;
        try {
            double share = costaudit::thinking_share(breakdown, costaudit::ShareVariant::tokens);
            row["thinking_token_share"] = share;
            token_share_cell = real_cell(share);
        } catch (const costaudit::Error&) {
            row["thinking_token_share"] = nullptr;
        }
        try {
            double share = costaudit::thinking_share(breakdown, costaudit::ShareVariant::cost);
            row["thinking_cost_share"] = share;
            cost_share_cell = real_cell(share);
        } catch (const costaudit::Error&) {
            row["thinking_cost_share"] = nullptr;
        }
        int table_decimals = opts.format == "table" ? 2 : 4;
        table.rows.push_back({model, money_cell(breakdown.prompt_cost, table_decimals),
                              money_cell(breakdown.thinking_cost, table_decimals),
                              money_cell(breakdown.generation_cost, table_decimals),
                              money_cell(breakdown.total_cost, table_decimals), token_share_cell,
                              cost_share_cell});
        payload["models"].push_back(std::move(row));
    }
    if (!any) throw costaudit::NotFoundError("unknown task '" + task + "': no records");

    ojson params{{"task", workload ? "ALL" : task}};
    ReportEnvelope env = costaudit::make_envelope("breakdown", catalog, params);
    env.payload = std::move(payload);
    emit(env, table, opts);
    return 0;
}

// ------------------------------------------------------------- variance ---

int cmd_variance(const CommonOptions& opts, const std::string& metric_name, const std::string& model) {
    PricingCatalog catalog = load_catalog(opts);
    Ledger ledger = load_ledger(opts);
    costaudit::VarianceMetric metric = metric_name == "cost" ? costaudit::VarianceMetric::cost
                                                             : costaudit::VarianceMetric::thinking_tokens;

    std::vector<std::string> models;
    if (!model.empty()) {
        models.push_back(model);
    } else {
        models = ledger.model_ids();
    }

    ojson payload;
    payload["metric"] = metric_name;
    payload["models"] = ojson::array();
    TextTable table;
    table.columns = {"model", "dataset", "query", "trials", "mean", "cv", "max/min"};

    bool any = false;
    for (const auto& m : models) {
        costaudit::ModelVarianceSummary summary;
        try {
            summary = costaudit::model_variance_summary(ledger, catalog, m, metric);
        } catch (const costaudit::NotFoundError&) {
            if (!model.empty()) throw;  // explicit model without trials is an input error
            continue;
        }
        any = true;
        ojson entry;
        entry["model_id"] = summary.model_id;
        entry["group_count"] = summary.per_query.size();
        entry["mean_cv"] = summary.mean_cv;
        entry["max_ratio"] = summary.max_ratio;
        entry["per_query"] = ojson::array();
        for (const auto& row : summary.per_query) {
            entry["per_query"].push_back(ojson{{"dataset_id", row.dataset_id},
                                               {"query_id", row.query_id},
                                               {"k", row.trial_count},
                                               {"mean", row.mean},
                                               {"cv", row.cv},
                                               {"max_min_ratio", row.max_min_ratio}});
            table.rows.push_back({summary.model_id, row.dataset_id, row.query_id,
                                  std::to_string(row.trial_count), real_cell(row.mean), real_cell(row.cv),
                                  real_cell(row.max_min_ratio)});
        }
        table.rows.push_back({summary.model_id, "(summary)", "", std::to_string(summary.per_query.size()),
                              "mean cv", real_cell(summary.mean_cv), real_cell(summary.max_ratio)});
        payload["models"].push_back(std::move(entry));
    }
    if (!any) throw costaudit::NotFoundError("no repeated trials in ledger");

    ojson params{{"metric", metric_name}};
    if (!model.empty()) params["model"] = model;
    ReportEnvelope env = costaudit::make_envelope("variance", catalog, params);
    env.payload = std::move(payload);
    emit(env, table, opts);
    return 0;
}

// -------------------------------------------------------------- predict ---

struct PredictOptions {
    std::string baseline = "mean";
    int k = 5;
    double test_ratio = 0.2;
    std::uint64_t seed = 0;
    std::string model;
    bool weighted = false;
    bool offline = false;
    std::string embed_endpoint;
    std::string embed_model;
    std::string embed_cache;
};

int cmd_predict(const CommonOptions& opts, const PredictOptions& p) {
    PricingCatalog catalog = load_catalog(opts);
    Ledger ledger = load_ledger(opts);

    Baseline baseline;
    if (p.baseline == "mean") {
        baseline = Baseline::mean;
    } else if (p.baseline == "lr") {
        baseline = Baseline::prompt_length_lr;
    } else if (p.baseline == "knn") {
        baseline = Baseline::embedding_knn;
    } else {
        throw costaudit::ValidationError("unknown baseline '" + p.baseline + "' (expected mean, lr, or knn)");
    }

    std::optional<costaudit::EmbeddingProvider> provider;
    if (baseline == Baseline::embedding_knn) {
        costaudit::EmbeddingProviderConfig config;
        config.endpoint_url = p.embed_endpoint;
        config.model = p.embed_model;
        config.cache_path = p.embed_cache;
        config.offline = p.offline;
        provider.emplace(std::move(config));
    }

    costaudit::SplitSpec spec{p.test_ratio, p.seed};
    costaudit::KnnOptions knn{p.k, p.weighted};

    std::vector<std::string> models;
    if (!p.model.empty()) {
        models.push_back(p.model);
    } else {
        models = ledger.model_ids();
    }

    ojson payload;
    payload["baseline"] = std::string(costaudit::baseline_name(baseline));
    payload["seed"] = p.seed;
    payload["test_ratio"] = p.test_ratio;
    if (baseline == Baseline::embedding_knn) {
        payload["k"] = p.k;
        payload["distance_metric"] = "cosine";
        payload["neighbor_pooling"] = p.weighted ? "distance_weighted" : "unweighted_mean";
    }
    payload["models"] = ojson::array();

    TextTable table;
    table.columns = {"model", "test queries", "mae"};

    for (const auto& model : models) {
        auto queries = costaudit::labeled_queries(ledger, catalog, model);
        if (queries.empty()) {
            throw costaudit::NotFoundError("no original-trial records for model '" + model + "'");
        }
        if (baseline == Baseline::embedding_knn) {
            costaudit::attach_embeddings(queries, ledger, *provider);
        }
        costaudit::PredictionReport report = costaudit::run_baseline(queries, baseline, spec, knn);

        ojson entry;
        entry["model_id"] = report.model_id;
        entry["mae"] = costaudit::display_money(report.mae, opts.decimals);
        entry["test_count"] = report.per_query.size();
        entry["per_dataset_mae"] = ojson::object();
        for (const auto& [dataset, mae] : report.per_dataset_mae) {
            entry["per_dataset_mae"][dataset] = costaudit::display_money(mae, opts.decimals);
        }
        entry["per_query"] = ojson::array();
        for (const auto& pair : report.per_query) {
            entry["per_query"].push_back(ojson{{"query_id", pair.query_id},
                                               {"predicted", costaudit::display_money(pair.predicted, opts.decimals)},
                                               {"actual", costaudit::display_money(pair.actual, opts.decimals)}});
        }
        payload["models"].push_back(std::move(entry));
        table.rows.push_back({report.model_id, std::to_string(report.per_query.size()),
                              money_cell(report.mae, opts.format == "table" ? 4 : 4)});
    }

    ojson params{{"baseline", p.baseline}, {"k", p.k}, {"test_ratio", p.test_ratio}, {"seed", p.seed}};
    if (!p.model.empty()) params["model"] = p.model;
    ReportEnvelope env = costaudit::make_envelope("predict", catalog, params);
    env.payload = std::move(payload);
    emit(env, table, opts);
    return 0;
}

// -------------------------------------------------------------- collect ---

struct CollectCliOptions {
    std::string config_path;
    std::string queries_path;
    int trials = 1;
    std::string dry_run_dir;
    std::string out_path;
    double max_spend = 0;
    bool echo_text = false;
};

int cmd_collect(const CommonOptions& opts, const CollectCliOptions& c) {
    costaudit::CollectorConfig config = costaudit::load_collector_config(c.config_path);
    auto queries = costaudit::load_collect_queries(c.queries_path);

    costaudit::CollectOptions options;
    options.dry_run_dir = c.dry_run_dir;
    options.max_spend_usd = c.max_spend;
    options.echo_query_text = c.echo_text;

    std::optional<PricingCatalog> catalog;
    if (!opts.catalog_path.empty() || opts.paper_fixture) {
        catalog = load_catalog(opts);
        options.pricing = &catalog->pricing(config.model_id);
    } else if (c.max_spend > 0) {
        throw costaudit::ValidationError("--max-spend requires --catalog (or --paper-fixture) for pricing");
    }

    costaudit::CollectResult result = costaudit::collect(config, queries, c.trials, options);

    // Appends only records whose key is new; duplicates are rejected by the
    // ledger uniqueness invariant and reported, never silently rewritten.
    std::size_t duplicates = 0;
    if (!c.out_path.empty()) {
        Ledger existing;
        if (std::filesystem::exists(c.out_path)) {
            existing = Ledger::ingest(c.out_path);
        }
        std::ofstream out(c.out_path, std::ios::app);
        if (!out) throw costaudit::IoError("cannot append to " + c.out_path);
        Ledger appended = std::move(existing);
        for (const auto& rec : result.records) {
            try {
                appended.append(rec);
            } catch (const costaudit::ValidationError& e) {
                ++duplicates;
                std::cerr << "warning: rejected " << e.what() << '\n';
                continue;
            }
            std::ostringstream line;
            Ledger::from_records({rec}).write_jsonl(line);
            out << line.str();
        }
    }

    ojson payload;
    payload["model_id"] = config.model_id;
    payload["requested"] = queries.size() * static_cast<std::size_t>(c.trials);
    payload["collected"] = result.records.size();
    payload["missing_thinking"] = result.missing_thinking;
    payload["aborted_on_budget"] = result.aborted_on_budget;
    payload["duplicates_rejected"] = duplicates;
    payload["failures"] = ojson::array();
    for (const auto& failure : result.failures) {
        payload["failures"].push_back(ojson{{"query_id", failure.query_id},
                                            {"trial_index", failure.trial_index},
                                            {"reason", failure.reason}});
    }
    if (!c.out_path.empty()) payload["output"] = c.out_path;

    TextTable table;
    table.columns = {"query", "trial", "status"};
    for (const auto& rec : result.records) {
        table.rows.push_back({rec.query_id, std::to_string(rec.trial_index), "ok"});
    }
    for (const auto& failure : result.failures) {
        table.rows.push_back({failure.query_id, std::to_string(failure.trial_index), failure.reason});
    }

    ojson params{{"config", c.config_path},
                 {"queries", c.queries_path},
                 {"trials", c.trials},
                 {"dry_run", !c.dry_run_dir.empty()}};
    ReportEnvelope env;
    if (catalog) {
        env = costaudit::make_envelope("collect", *catalog, params);
    } else {
        env.tool_version = costaudit::kToolVersion;
        env.catalog_snapshot_date = "";
        env.command = "collect";
        env.parameters = params;
        env.generated_at = costaudit::current_timestamp_utc();
    }
    env.payload = std::move(payload);
    emit(env, table, opts);
    return result.failures.empty() || !result.records.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cost auditing for reasoning-model APIs: actual cost vs listed price"};
    app.set_version_flag("--version", std::string(costaudit::kToolVersion));
    app.require_subcommand(1);

    CommonOptions common;

    auto* audit = app.add_subcommand("audit", "Per-(model, dataset) cost table with per-model totals");
    CommonOptions audit_opts;
    add_common_flags(audit, audit_opts);

    auto* reversals = app.add_subcommand("reversals", "Pricing reversals between listed price and actual cost");
    CommonOptions reversal_opts;
    std::string task = "ALL";
    std::string cost_mode = "actual";
    add_common_flags(reversals, reversal_opts);
    reversals->add_option("--task", task, "Dataset id, or ALL to pool every task")->default_val("ALL");
    reversals->add_option("--cost-mode", cost_mode, "actual or ablated")
        ->check(CLI::IsMember({"actual", "ablated"}))
        ->default_val("actual");

    auto* ablate = app.add_subcommand("ablate", "Ranking consistency with thinking-token costs removed");
    CommonOptions ablate_opts;
    add_common_flags(ablate, ablate_opts);

    auto* breakdown = app.add_subcommand("breakdown", "Cost and token decomposition by type");
    CommonOptions breakdown_opts;
    std::string breakdown_task;
    add_common_flags(breakdown, breakdown_opts);
    breakdown->add_option("--task", breakdown_task, "Dataset id (default: whole workload)");

    auto* variance = app.add_subcommand("variance", "Within-query variability across repeated trials");
    CommonOptions variance_opts;
    std::string metric = "cost";
    std::string variance_model;
    add_common_flags(variance, variance_opts);
    variance->add_option("--metric", metric, "cost or tokens")
        ->check(CLI::IsMember({"cost", "tokens"}))
        ->default_val("cost");
    variance->add_option("--model", variance_model, "Restrict to one model");

    auto* predict = app.add_subcommand("predict", "Per-query cost prediction baselines with MAE");
    CommonOptions predict_common;
    PredictOptions predict_opts;
    add_common_flags(predict, predict_common);
    predict->add_option("--baseline", predict_opts.baseline, "mean, lr, or knn")
        ->check(CLI::IsMember({"mean", "lr", "knn"}))
        ->default_val("mean");
    predict->add_option("--k", predict_opts.k, "Neighbor count for knn")->default_val(5);
    predict->add_option("--test-ratio", predict_opts.test_ratio, "Test fraction in (0,1)")->default_val(0.2);
    predict->add_option("--seed", predict_opts.seed, "Split seed")->default_val(0);
    predict->add_option("--model", predict_opts.model, "Restrict to one model");
    predict->add_flag("--weighted", predict_opts.weighted, "Distance-weighted neighbor averaging");
    predict->add_flag("--offline", predict_opts.offline, "Serve embeddings from cache only");
    predict->add_option("--embed-endpoint", predict_opts.embed_endpoint, "Embedding HTTP endpoint");
    predict->add_option("--embed-model", predict_opts.embed_model, "Embedding model name");
    predict->add_option("--embed-cache", predict_opts.embed_cache, "Embedding cache file");

    auto* collect = app.add_subcommand("collect", "Call a chat-completions endpoint and append usage records");
    CommonOptions collect_common;
    CollectCliOptions collect_opts;
    add_common_flags(collect, collect_common, /*needs_ledger=*/false);
    collect->add_option("--config", collect_opts.config_path, "Collector config (JSON)")->required();
    collect->add_option("--queries", collect_opts.queries_path, "Query file (JSONL)")->required();
    collect->add_option("--trials", collect_opts.trials, "Trials per query")->default_val(1);
    collect->add_option("--dry-run", collect_opts.dry_run_dir, "Directory of canned response files");
    collect->add_option("--out", collect_opts.out_path, "Ledger file to append records to");
    collect->add_option("--max-spend", collect_opts.max_spend, "Abort once accumulated cost reaches this (USD)");
    collect->add_flag("--echo-text", collect_opts.echo_text, "Store the prompt text in query_text");

    CLI11_PARSE(app, argc, argv);

    try {
        if (audit->parsed()) return cmd_audit(audit_opts);
        if (reversals->parsed()) return cmd_reversals(reversal_opts, task, cost_mode);
        if (ablate->parsed()) return cmd_ablate(ablate_opts);
        if (breakdown->parsed()) return cmd_breakdown(breakdown_opts, breakdown_task);
        if (variance->parsed()) return cmd_variance(variance_opts, metric, variance_model);
        if (predict->parsed()) return cmd_predict(predict_common, predict_opts);
        if (collect->parsed()) return cmd_collect(collect_common, collect_opts);
    } catch (const costaudit::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
