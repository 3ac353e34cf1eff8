#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <string>

#include "flutrack/common.hpp"

namespace flutrack {

// Dates are handled as days since the Unix epoch (1970-01-01). Weekly series
// follow the CDC's epidemiological week convention: weeks start on Sunday,
// and week 1 of a year is the first week with at least four days in January
// (equivalently, the Sunday-start week containing January 4).

struct CivilDate {
    int year;
    unsigned month; // 1..12
    unsigned day;   // 1..31
};

// Howard Hinnant's civil-from-days / days-from-civil algorithms.
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{y + (m <= 2), m, d};
}

// 0 = Sunday .. 6 = Saturday. Day 0 (1970-01-01) was a Thursday.
inline int weekday_sun0(std::int64_t day) {
    return static_cast<int>(((day % 7) + 11) % 7);
}

inline std::int64_t sunday_on_or_before(std::int64_t day) {
    return day - weekday_sun0(day);
}

struct MmwrWeek {
    int year;
    int week; // 1..53
};

inline MmwrWeek mmwr_week(std::int64_t day) {
    const std::int64_t ws = sunday_on_or_before(day);
    const int year = civil_from_days(ws + 3).year; // the week's Wednesday decides the year
    const std::int64_t first = sunday_on_or_before(days_from_civil(year, 1, 4));
    return MmwrWeek{year, static_cast<int>((ws - first) / 7) + 1};
}

inline std::string format_date(std::int64_t day) {
    const CivilDate c = civil_from_days(day);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.year, c.month, c.day);
    return buf;
}

// Strict ISO "YYYY-MM-DD".
inline std::int64_t parse_date(const std::string& s) {
    auto fail = [&] { throw config_error("invalid date '" + s + "' (expected YYYY-MM-DD)"); };
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') fail();
    int y = 0;
    unsigned m = 0, d = 0;
    auto conv = [&](const char* b, const char* e, auto& out) {
        auto [p, ec] = std::from_chars(b, e, out);
        if (ec != std::errc() || p != e) fail();
    };
    conv(s.data(), s.data() + 4, y);
    conv(s.data() + 5, s.data() + 7, m);
    conv(s.data() + 8, s.data() + 10, d);
    if (m < 1 || m > 12 || d < 1 || d > 31) fail();
    const std::int64_t day = days_from_civil(y, m, d);
    const CivilDate back = civil_from_days(day);
    if (back.year != y || back.month != m || back.day != d) fail();
    return day;
}

inline std::int64_t day_from_timestamp(std::int64_t utc_seconds) {
    // Floor division so pre-epoch timestamps land on the right day.
    std::int64_t d = utc_seconds / 86400;
    if (utc_seconds % 86400 < 0) --d;
    return d;
}

} // namespace flutrack
