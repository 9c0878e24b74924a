#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "costaudit/catalog.hpp"

namespace costaudit {

enum class ReportFormat { json, table, csv };

ReportFormat parse_format(std::string_view name);

// Every report ships inside this envelope so no cost figure is ever
// printed without its pricing provenance.
struct ReportEnvelope {
    std::string tool_version;
    std::string catalog_snapshot_date;
    std::string command;
    nlohmann::ordered_json parameters;
    std::string generated_at;
    nlohmann::ordered_json payload;

    nlohmann::ordered_json to_json() const;
};

ReportEnvelope make_envelope(std::string command, const PricingCatalog& catalog,
                             nlohmann::ordered_json parameters);

// Current UTC time, ISO-8601. Honors SOURCE_DATE_EPOCH so reports can be
// reproduced byte for byte.
std::string current_timestamp_utc();

// Small helper for the aligned-table and CSV output formats. The first
// column is left-aligned, the rest right-aligned.
struct TextTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::string render_aligned() const;
    std::string render_csv() const;
};

// Rounds a monetary value for machine payloads (half to even).
double display_money(double usd, int decimals);

}  // namespace costaudit
