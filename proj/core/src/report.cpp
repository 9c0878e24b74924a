#include "costaudit/report.hpp"

#include <cstdlib>
#include <ctime>
#include <sstream>

#include "costaudit/errors.hpp"
#include "costaudit/money.hpp"
#include "costaudit/version.hpp"

namespace costaudit {

ReportFormat parse_format(std::string_view name) {
    if (name == "json") return ReportFormat::json;
    if (name == "table") return ReportFormat::table;
    if (name == "csv") return ReportFormat::csv;
    throw ValidationError("unknown format '" + std::string(name) + "' (expected json, table, or csv)");
}

nlohmann::ordered_json ReportEnvelope::to_json() const {
    nlohmann::ordered_json doc;
    doc["tool_version"] = tool_version;
    doc["catalog_snapshot_date"] = catalog_snapshot_date;
    doc["command"] = command;
    doc["parameters"] = parameters;
    doc["generated_at"] = generated_at;
    doc["payload"] = payload;
    return doc;
}

ReportEnvelope make_envelope(std::string command, const PricingCatalog& catalog,
                             nlohmann::ordered_json parameters) {
    ReportEnvelope env;
    env.tool_version = kToolVersion;
    env.catalog_snapshot_date = catalog.snapshot_date().to_string();
    env.command = std::move(command);
    env.parameters = std::move(parameters);
    env.generated_at = current_timestamp_utc();
    return env;
}

std::string current_timestamp_utc() {
    std::time_t t;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    } else {
        t = std::time(nullptr);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string TextTable::render_aligned() const {
    std::vector<std::size_t> widths(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) widths[c] = columns[c].size();
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size() && c < widths.size(); ++c) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }
    std::ostringstream os;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < widths.size(); ++c) {
            const std::string& cell = c < cells.size() ? cells[c] : std::string{};
            if (c > 0) os << "  ";
            if (c == 0) {
                os << cell << std::string(widths[c] - cell.size(), ' ');
            } else {
                os << std::string(widths[c] - cell.size(), ' ') << cell;
            }
        }
        os << '\n';
    };
    emit(columns);
    std::size_t total = 0;
    for (std::size_t c = 0; c < widths.size(); ++c) total += widths[c] + (c > 0 ? 2 : 0);
    os << std::string(total, '-') << '\n';
    for (const auto& row : rows) emit(row);
    return os.str();
}

std::string TextTable::render_csv() const {
    auto quote = [](const std::string& field) {
        if (field.find_first_of(",\"\n") == std::string::npos) return field;
        std::string out = "\"";
        for (char c : field) {
            if (c == '"') out += '"';
            out += c;
        }
        out += '"';
        return out;
    };
    std::ostringstream os;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c > 0) os << ',';
            os << quote(cells[c]);
        }
        os << '\n';
    };
    emit(columns);
    for (const auto& row : rows) emit(row);
    return os.str();
}

double display_money(double usd, int decimals) { return round_half_even(usd, decimals); }

}  // namespace costaudit
