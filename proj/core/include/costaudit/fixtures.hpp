#pragma once

#include <string_view>

#include "costaudit/catalog.hpp"
#include "costaudit/ledger.hpp"

namespace costaudit::fixtures {

// The bundled pricing snapshot (identical to data/pricing_2026-02-28.csv).
std::string_view pricing_csv();

// The bundled per-(model, dataset) usage totals, one aggregate record per
// cell (identical to data/usage_totals_2026.jsonl).
std::string_view usage_totals_jsonl();

PricingCatalog load_catalog();
Ledger load_ledger();

}  // namespace costaudit::fixtures
