#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace costaudit {

// Parses a decimal USD amount ("1.75", "0.30") into micro-USD exactly.
// Catalog prices go through this so two-decimal table figures never pick up
// binary-float drift before cost arithmetic begins. Rejects empty input,
// stray characters, and more than six fractional digits.
std::int64_t parse_usd_micros(std::string_view text);

// Round half to even at the given number of decimals.
double round_half_even(double value, int decimals);

// Fixed-decimal USD string, rounded half to even.
std::string format_usd(double usd, int decimals);

// Per-million-token price. micros == USD/MTok scaled by 1e6, so one token
// costs exactly `micros` pico-USD.
struct UsdPerMTok {
    std::int64_t micros = 0;

    double usd() const { return static_cast<double>(micros) / 1e6; }

    friend UsdPerMTok operator+(UsdPerMTok a, UsdPerMTok b) { return {a.micros + b.micros}; }
    auto operator<=>(const UsdPerMTok&) const = default;
};

// Cost in USD of `tokens` tokens billed at `price`.
double token_cost_usd(UsdPerMTok price, std::int64_t tokens);

// Calendar date, ISO-8601 (yyyy-mm-dd).
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    static Date parse(std::string_view iso);
    std::string to_string() const;

    auto operator<=>(const Date&) const = default;
};

}  // namespace costaudit
