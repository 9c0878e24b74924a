#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "costaudit/money.hpp"

namespace costaudit {

// One row of the pricing catalog: what a provider charges per million
// prompt and output tokens. Thinking tokens are billed at the output rate,
// so no separate thinking price exists.
struct ModelPricing {
    std::string model_id;
    std::string provider;
    UsdPerMTok input_price_per_mtok;
    UsdPerMTok output_price_per_mtok;
    Date snapshot_date;

    // The sticker figure users compare: input + output unit price.
    UsdPerMTok listed_price() const { return input_price_per_mtok + output_price_per_mtok; }
};

// Immutable after load; safe for unrestricted concurrent reads.
class PricingCatalog {
public:
    PricingCatalog() = default;

    // Loads from CSV (header row required) or a JSON array of objects,
    // chosen by extension with a content sniff fallback.
    static PricingCatalog load(const std::filesystem::path& path);
    static PricingCatalog parse_csv(std::istream& in, std::string_view source_name);
    static PricingCatalog parse_json(std::istream& in, std::string_view source_name);
    static PricingCatalog from_entries(std::vector<ModelPricing> entries);

    const ModelPricing& pricing(std::string_view model_id) const;
    const ModelPricing* find(std::string_view model_id) const;
    double listed_price_usd(std::string_view model_id) const;

    const std::vector<ModelPricing>& entries() const { return entries_; }
    std::vector<std::string> model_ids() const;  // sorted
    Date snapshot_date() const { return snapshot_date_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    // One note per ignored column, for the CLI to surface.
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    void insert(ModelPricing entry, std::string_view source, std::size_t row);
    void finalize(std::string_view source);

    std::vector<ModelPricing> entries_;
    std::map<std::string, std::size_t, std::less<>> index_;
    Date snapshot_date_{};
    std::vector<std::string> warnings_;
};

}  // namespace costaudit
