#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace inflscope {

/// Calendar date. Monthly observations carry day = 1.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    /// Accepts `YYYY-MM-DD` or `YYYY-MM`; throws IngestError otherwise.
    static Date parse(std::string_view text);

    /// `YYYY-MM-DD`, or `YYYY-MM` when `with_day` is false.
    std::string iso(bool with_day = true) const;

    /// Days since 1970-01-01 (proleptic Gregorian).
    long days_since_epoch() const;
    static Date from_days_since_epoch(long days);

    /// 1 = Monday ... 7 = Sunday.
    int weekday() const;

    Date add_months(int months) const;
};

int days_in_month(int year, int month);

}  // namespace inflscope
