#include "costaudit/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "costaudit/errors.hpp"
#include "text_util.hpp"

namespace costaudit {

namespace {

const std::set<std::string, std::less<>> kKnownColumns = {
    "model_id", "provider", "input_price_per_mtok", "output_price_per_mtok", "snapshot_date"};

UsdPerMTok parse_price(std::string_view text, std::string_view column, std::string_view source, std::size_t row) {
    std::int64_t micros;
    try {
        micros = parse_usd_micros(detail::trim(text));
    } catch (const ParseError& e) {
        throw ParseError(std::string(source) + " row " + std::to_string(row) + ": " + e.what());
    }
    if (micros < 0) {
        throw ValidationError(std::string(source) + " row " + std::to_string(row) + ": negative price in " +
                              std::string(column));
    }
    return {micros};
}

}  // namespace

PricingCatalog PricingCatalog::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open catalog file: " + path.string());
    std::string name = path.filename().string();
    if (path.extension() == ".json") return parse_json(in, name);
    // Sniff: a JSON document starts with '[' or '{'.
    int first = in.peek();
    if (first == '[' || first == '{') return parse_json(in, name);
    return parse_csv(in, name);
}

PricingCatalog PricingCatalog::parse_csv(std::istream& in, std::string_view source_name) {
    PricingCatalog catalog;
    std::string line;
    if (!std::getline(in, line) || detail::trim(line).empty()) {
        throw ParseError(std::string(source_name) + ": empty catalog");
    }

    auto header = detail::split_csv_line(line);
    std::map<std::string, std::size_t, std::less<>> col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string name(detail::trim(header[i]));
        if (kKnownColumns.count(name) == 0) {
            catalog.warnings_.push_back("ignoring unknown column '" + name + "'");
        }
        col[name] = i;
    }
    for (const auto& required : kKnownColumns) {
        if (col.find(required) == col.end()) {
            throw ParseError(std::string(source_name) + ": missing column '" + std::string(required) + "'");
        }
    }

    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() < header.size()) {
            throw ParseError(std::string(source_name) + " row " + std::to_string(row) + ": expected " +
                             std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
        }
        ModelPricing entry;
        entry.model_id = detail::trim(fields[col["model_id"]]);
        entry.provider = detail::trim(fields[col["provider"]]);
        entry.input_price_per_mtok = parse_price(fields[col["input_price_per_mtok"]], "input_price_per_mtok",
                                                 source_name, row);
        entry.output_price_per_mtok = parse_price(fields[col["output_price_per_mtok"]], "output_price_per_mtok",
                                                  source_name, row);
        try {
            entry.snapshot_date = Date::parse(detail::trim(fields[col["snapshot_date"]]));
        } catch (const ParseError& e) {
            throw ParseError(std::string(source_name) + " row " + std::to_string(row) + ": " + e.what());
        }
        catalog.insert(std::move(entry), source_name, row);
    }
    catalog.finalize(source_name);
    return catalog;
}

PricingCatalog PricingCatalog::parse_json(std::istream& in, std::string_view source_name) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string(source_name) + ": " + e.what());
    }
    if (!doc.is_array()) {
        throw ParseError(std::string(source_name) + ": expected a JSON array of pricing entries");
    }
    PricingCatalog catalog;
    std::size_t row = 0;
    for (const auto& item : doc) {
        ++row;
        if (!item.is_object()) {
            throw ParseError(std::string(source_name) + " entry " + std::to_string(row) + ": not an object");
        }
        ModelPricing entry;
        for (auto it = item.begin(); it != item.end(); ++it) {
            if (kKnownColumns.count(it.key()) == 0) {
                catalog.warnings_.push_back("ignoring unknown column '" + it.key() + "'");
            }
        }
        auto text_field = [&](const char* key) -> std::string {
            if (!item.contains(key)) {
                throw ParseError(std::string(source_name) + " entry " + std::to_string(row) + ": missing '" +
                                 key + "'");
            }
            const auto& v = item.at(key);
            if (v.is_string()) return v.get<std::string>();
            if (v.is_number()) {
                std::ostringstream os;
                os << v;
                return os.str();
            }
            throw ParseError(std::string(source_name) + " entry " + std::to_string(row) + ": bad type for '" +
                             key + "'");
        };
        entry.model_id = text_field("model_id");
        entry.provider = text_field("provider");
        entry.input_price_per_mtok = parse_price(text_field("input_price_per_mtok"), "input_price_per_mtok",
                                                 source_name, row);
        entry.output_price_per_mtok = parse_price(text_field("output_price_per_mtok"), "output_price_per_mtok",
                                                  source_name, row);
        entry.snapshot_date = Date::parse(text_field("snapshot_date"));
        catalog.insert(std::move(entry), source_name, row);
    }
    catalog.finalize(source_name);
    return catalog;
}

PricingCatalog PricingCatalog::from_entries(std::vector<ModelPricing> entries) {
    PricingCatalog catalog;
    std::size_t row = 0;
    for (auto& entry : entries) {
        if (entry.input_price_per_mtok.micros < 0 || entry.output_price_per_mtok.micros < 0) {
            throw ValidationError("negative price for model '" + entry.model_id + "'");
        }
        catalog.insert(std::move(entry), "<entries>", ++row);
    }
    catalog.finalize("<entries>");
    return catalog;
}

void PricingCatalog::insert(ModelPricing entry, std::string_view source, std::size_t row) {
    if (entry.model_id.empty()) {
        throw ValidationError(std::string(source) + " row " + std::to_string(row) + ": empty model_id");
    }
    if (!index_.emplace(entry.model_id, entries_.size()).second) {
        throw ValidationError(std::string(source) + " row " + std::to_string(row) + ": duplicate model_id '" +
                              entry.model_id + "'");
    }
    entries_.push_back(std::move(entry));
}

void PricingCatalog::finalize(std::string_view source) {
    if (entries_.empty()) throw ValidationError(std::string(source) + ": empty catalog");
    snapshot_date_ = entries_.front().snapshot_date;
}

const ModelPricing* PricingCatalog::find(std::string_view model_id) const {
    auto it = index_.find(model_id);
    return it == index_.end() ? nullptr : &entries_[it->second];
}

const ModelPricing& PricingCatalog::pricing(std::string_view model_id) const {
    if (const ModelPricing* p = find(model_id)) return *p;
    throw NotFoundError("unknown model_id '" + std::string(model_id) + "' in pricing catalog");
}

double PricingCatalog::listed_price_usd(std::string_view model_id) const {
    return pricing(model_id).listed_price().usd();
}

std::vector<std::string> PricingCatalog::model_ids() const {
    std::vector<std::string> ids;
    ids.reserve(entries_.size());
    for (const auto& [id, idx] : index_) ids.push_back(id);
    return ids;
}

}  // namespace costaudit
