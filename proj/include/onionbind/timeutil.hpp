#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace onionbind {

// All timestamps are UTC with seconds precision.
using TimePoint = std::chrono::time_point<std::chrono::system_clock, std::chrono::seconds>;

inline TimePoint now_utc() {
    return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

inline TimePoint from_unix(std::int64_t secs) {
    return TimePoint{std::chrono::seconds{secs}};
}

inline std::int64_t to_unix(TimePoint t) {
    return t.time_since_epoch().count();
}

// RFC 3339 "YYYY-MM-DDTHH:MM:SSZ", nothing else accepted.
std::string format_rfc3339(TimePoint t);
TimePoint parse_rfc3339(std::string_view text); // throws Errc::InvalidTimestamp

} // namespace onionbind
