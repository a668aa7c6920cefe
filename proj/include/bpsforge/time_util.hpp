#pragma once

#include <cstdint>
#include <string>

namespace bpsforge {

// All timestamps are UTC epoch seconds.
using Timestamp = std::int64_t;

constexpr std::int64_t kSecondsPerDay = 86400;
constexpr std::int64_t kSecondsPerWeek = 7 * kSecondsPerDay;

// Accepts ISO-8601 ("2011-01-01T00:37:00", optional fractional seconds and
// Z/+HH:MM offset) and the slash form "2011/01/01 00:37:00". Fractional
// seconds are truncated. Throws ParseError on anything else.
Timestamp parse_timestamp(const std::string& text);

// "2011-01-01T00:37:00Z"
std::string format_timestamp(Timestamp ts);

// Floor division that is correct for pre-1970 timestamps.
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline std::int64_t positive_mod(std::int64_t a, std::int64_t b) {
    std::int64_t m = a % b;
    return m < 0 ? m + b : m;
}

inline std::int64_t day_index(Timestamp ts) { return floor_div(ts, kSecondsPerDay); }

// Monday = 0 .. Sunday = 6 (1970-01-01 was a Thursday).
inline int weekday(Timestamp ts) { return static_cast<int>(positive_mod(day_index(ts) + 3, 7)); }

// Seconds since Monday 00:00 of the timestamp's week.
inline std::int64_t week_offset(Timestamp ts) {
    return static_cast<std::int64_t>(weekday(ts)) * kSecondsPerDay + positive_mod(ts, kSecondsPerDay);
}

// 0..167, used by timetable mining.
inline int hour_of_week(Timestamp ts) { return static_cast<int>(week_offset(ts) / 3600); }

}  // namespace bpsforge
