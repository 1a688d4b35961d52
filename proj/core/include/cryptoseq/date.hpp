#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace cryptoseq {

/// Calendar day stored as a serial day number (days since 1970-01-01,
/// proleptic Gregorian). Day arithmetic is plain integer arithmetic.
struct Date {
    std::int32_t serial = 0;

    auto operator<=>(const Date&) const = default;

    Date next() const { return Date{serial + 1}; }
    Date prev() const { return Date{serial - 1}; }
    Date plus_days(std::int32_t n) const { return Date{serial + n}; }
};

Date date_from_ymd(int year, int month, int day);
void ymd_from_date(Date d, int& year, int& month, int& day);

/// Strict ISO-8601 "YYYY-MM-DD"; throws ValueError on anything else.
Date parse_date(const std::string& text);
std::string format_date(Date d);

inline std::int32_t days_between(Date from, Date to) { return to.serial - from.serial; }

} // namespace cryptoseq
