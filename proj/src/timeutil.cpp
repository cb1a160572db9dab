#include "onionbind/timeutil.hpp"

#include <charconv>
#include <cstdio>

#include "onionbind/errors.hpp"

namespace onionbind {

namespace {

// Proleptic Gregorian day arithmetic (Howard Hinnant's algorithms).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr unsigned lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2) {
        bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return leap ? 29 : 28;
    }
    return lengths[m - 1];
}

unsigned parse_fixed(std::string_view text, std::size_t pos, std::size_t len) {
    unsigned value = 0;
    for (std::size_t i = 0; i < len; ++i) {
        char c = text[pos + i];
        if (c < '0' || c > '9')
            throw Error(Errc::InvalidTimestamp, "digit expected");
        value = value * 10 + static_cast<unsigned>(c - '0');
    }
    return value;
}

} // namespace

std::string format_rfc3339(TimePoint t) {
    std::int64_t secs = to_unix(t);
    std::int64_t days = secs / 86400;
    std::int64_t rem = secs % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    unsigned hh = static_cast<unsigned>(rem / 3600);
    unsigned mm = static_cast<unsigned>(rem / 60 % 60);
    unsigned ss = static_cast<unsigned>(rem % 60);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02u:%02u:%02uZ",
                  static_cast<long long>(y), m, d, hh, mm, ss);
    return buf;
}

TimePoint parse_rfc3339(std::string_view text) {
    // YYYY-MM-DDTHH:MM:SSZ, 20 characters, nothing optional.
    if (text.size() != 20)
        throw Error(Errc::InvalidTimestamp, "expected YYYY-MM-DDTHH:MM:SSZ");
    if (text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' ||
        text[16] != ':' || text[19] != 'Z')
        throw Error(Errc::InvalidTimestamp, "expected YYYY-MM-DDTHH:MM:SSZ");
    unsigned year = parse_fixed(text, 0, 4);
    unsigned month = parse_fixed(text, 5, 2);
    unsigned day = parse_fixed(text, 8, 2);
    unsigned hour = parse_fixed(text, 11, 2);
    unsigned minute = parse_fixed(text, 14, 2);
    unsigned second = parse_fixed(text, 17, 2);
    if (month < 1 || month > 12)
        throw Error(Errc::InvalidTimestamp, "month out of range");
    if (day < 1 || day > days_in_month(year, month))
        throw Error(Errc::InvalidTimestamp, "day out of range");
    if (hour > 23 || minute > 59 || second > 59)
        throw Error(Errc::InvalidTimestamp, "time out of range");
    std::int64_t days = days_from_civil(year, month, day);
    return from_unix(days * 86400 + hour * 3600 + minute * 60 + second);
}

} // namespace onionbind
