#include "bpsforge/time_util.hpp"

#include <array>
#include <cctype>
#include <cstdio>

#include "bpsforge/common.hpp"

namespace bpsforge {

namespace {

// Howard Hinnant's civil date algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

bool read_int(const std::string& s, std::size_t& pos, int digits, int& out) {
    if (pos + digits > s.size()) return false;
    int v = 0;
    for (int i = 0; i < digits; ++i) {
        char c = s[pos + static_cast<std::size_t>(i)];
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        v = v * 10 + (c - '0');
    }
    pos += static_cast<std::size_t>(digits);
    out = v;
    return true;
}

}  // namespace

Timestamp parse_timestamp(const std::string& text) {
    // Trim surrounding whitespace.
    std::size_t b = 0, e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    const std::string s = text.substr(b, e - b);

    auto fail = [&]() -> Timestamp { throw ParseError("malformed timestamp: '" + text + "'"); };

    std::size_t pos = 0;
    int year = 0, month = 0, day = 0;
    if (!read_int(s, pos, 4, year)) return fail();
    if (pos >= s.size() || (s[pos] != '-' && s[pos] != '/')) return fail();
    const char date_sep = s[pos++];
    if (!read_int(s, pos, 2, month)) return fail();
    if (pos >= s.size() || s[pos] != date_sep) return fail();
    ++pos;
    if (!read_int(s, pos, 2, day)) return fail();

    int hour = 0, minute = 0, second = 0;
    if (pos < s.size()) {
        if (s[pos] != 'T' && s[pos] != ' ') return fail();
        ++pos;
        if (!read_int(s, pos, 2, hour)) return fail();
        if (pos >= s.size() || s[pos] != ':') return fail();
        ++pos;
        if (!read_int(s, pos, 2, minute)) return fail();
        if (pos < s.size() && s[pos] == ':') {
            ++pos;
            if (!read_int(s, pos, 2, second)) return fail();
        }
        if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
            ++pos;
            std::size_t start = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            if (pos == start) return fail();
        }
    }

    std::int64_t offset = 0;
    if (pos < s.size()) {
        const char c = s[pos];
        if (c == 'Z' || c == 'z') {
            ++pos;
        } else if (c == '+' || c == '-') {
            const int sign = c == '+' ? 1 : -1;
            ++pos;
            int oh = 0, om = 0;
            if (!read_int(s, pos, 2, oh)) return fail();
            if (pos < s.size() && s[pos] == ':') ++pos;
            if (pos < s.size()) {
                if (!read_int(s, pos, 2, om)) return fail();
            }
            offset = sign * (static_cast<std::int64_t>(oh) * 3600 + om * 60);
        } else {
            return fail();
        }
    }
    if (pos != s.size()) return fail();
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
        return fail();

    const std::int64_t days = days_from_civil(year, month, day);
    return days * kSecondsPerDay + hour * 3600 + minute * 60 + second - offset;
}

std::string format_timestamp(Timestamp ts) {
    int y = 0, m = 0, d = 0;
    civil_from_days(day_index(ts), y, m, d);
    const std::int64_t sod = positive_mod(ts, kSecondsPerDay);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                  static_cast<int>(sod / 3600), static_cast<int>((sod / 60) % 60),
                  static_cast<int>(sod % 60));
    return buf;
}

}  // namespace bpsforge
