#include "inflscope/date.hpp"

#include <charconv>
#include <cstdio>

#include "inflscope/error.hpp"

namespace inflscope {

namespace {

bool parse_int(std::string_view text, int& out) {
    if (text.empty()) return false;
    for (char c : text)
        if (c < '0' || c > '9') return false;
    auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

bool is_leap(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

}  // namespace

int days_in_month(int year, int month) {
    static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap(year)) return 29;
    return kDays[month - 1];
}

Date Date::parse(std::string_view text) {
    // YYYY-MM or YYYY-MM-DD
    Date d;
    bool ok = false;
    if (text.size() == 7 && text[4] == '-') {
        ok = parse_int(text.substr(0, 4), d.year) && parse_int(text.substr(5, 2), d.month);
        d.day = 1;
    } else if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
        ok = parse_int(text.substr(0, 4), d.year) && parse_int(text.substr(5, 2), d.month) &&
             parse_int(text.substr(8, 2), d.day);
    }
    if (!ok || d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month))
        throw IngestError("unparseable date '" + std::string(text) + "'");
    return d;
}

std::string Date::iso(bool with_day) const {
    char buf[16];
    if (with_day)
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    else
        std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
}

// Howard Hinnant's civil-date algorithms.
long Date::days_since_epoch() const {
    const int y = year - (month <= 2 ? 1 : 0);
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned mp = static_cast<unsigned>(month + (month > 2 ? -3 : 9));
    const unsigned doy = (153 * mp + 2) / 5 + static_cast<unsigned>(day) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

Date Date::from_days_since_epoch(long z) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long y = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return Date{static_cast<int>(y + (m <= 2 ? 1 : 0)), static_cast<int>(m), static_cast<int>(d)};
}

int Date::weekday() const {
    const long z = days_since_epoch();
    // 1970-01-01 was a Thursday.
    const long w = ((z % 7) + 7 + 3) % 7;  // 0 = Monday
    return static_cast<int>(w) + 1;
}

Date Date::add_months(int months) const {
    int total = year * 12 + (month - 1) + months;
    Date d{total / 12, total % 12 + 1, day};
    if (d.day > days_in_month(d.year, d.month)) d.day = days_in_month(d.year, d.month);
    return d;
}

}  // namespace inflscope
