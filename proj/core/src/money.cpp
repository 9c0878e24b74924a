#include "costaudit/money.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "costaudit/errors.hpp"

namespace costaudit {

std::int64_t parse_usd_micros(std::string_view text) {
    const std::string_view original = text;
    auto fail = [&](const char* why) -> std::int64_t {
        throw ParseError("invalid USD amount '" + std::string(original) + "': " + why);
    };

    bool negative = false;
    if (!text.empty() && (text.front() == '+' || text.front() == '-')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    if (text.empty()) return fail("no digits");

    std::size_t dot = text.find('.');
    std::string_view int_part = text.substr(0, dot);
    std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (int_part.empty() && frac_part.empty()) return fail("no digits");
    if (frac_part.size() > 6) return fail("more than six fractional digits");

    std::int64_t whole = 0;
    if (!int_part.empty()) {
        auto [ptr, ec] = std::from_chars(int_part.data(), int_part.data() + int_part.size(), whole);
        if (ec != std::errc{} || ptr != int_part.data() + int_part.size()) return fail("malformed integer part");
    }

    std::int64_t frac = 0;
    std::int64_t scale = 100000;  // first fractional digit is worth 1e5 micro-USD
    for (char c : frac_part) {
        if (c < '0' || c > '9') return fail("malformed fractional part");
        frac += static_cast<std::int64_t>(c - '0') * scale;
        scale /= 10;
    }

    if (whole > (INT64_MAX - frac) / 1000000) return fail("overflow");
    std::int64_t micros = whole * 1000000 + frac;
    return negative ? -micros : micros;
}

double round_half_even(double value, int decimals) {
    double scale = std::pow(10.0, decimals);
    // nearbyint uses the current rounding mode; the default FE_TONEAREST
    // is round half to even.
    return std::nearbyint(value * scale) / scale;
}

std::string format_usd(double usd, int decimals) {
    double rounded = round_half_even(usd, decimals);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, rounded);
    return buf;
}

double token_cost_usd(UsdPerMTok price, std::int64_t tokens) {
    return static_cast<double>(price.micros) * static_cast<double>(tokens) / 1e12;
}

Date Date::parse(std::string_view iso) {
    auto fail = [&]() -> Date {
        throw ParseError("invalid ISO date '" + std::string(iso) + "' (expected yyyy-mm-dd)");
    };
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return fail();
    auto num = [&](std::string_view s, int& out) {
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && ptr == s.data() + s.size();
    };
    Date d;
    if (!num(iso.substr(0, 4), d.year) || !num(iso.substr(5, 2), d.month) || !num(iso.substr(8, 2), d.day)) {
        return fail();
    }
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) return fail();
    return d;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

}  // namespace costaudit
