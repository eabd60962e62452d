#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace noxcast {

/// Naive local wall-clock time at minute resolution, stored as minutes since
/// 1970-01-01 00:00. No time zone or DST handling.
struct Timestamp {
  std::int64_t minutes = 0;

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

/// Parses exactly "YYYY-MM-DD HH:MM". Returns nullopt for anything else,
/// including out-of-range calendar fields.
std::optional<Timestamp> parse_timestamp(std::string_view text);

std::string format_timestamp(Timestamp ts);

inline int minute_of_hour(Timestamp ts) {
  auto m = ts.minutes % 60;
  if (m < 0) m += 60;
  return static_cast<int>(m);
}

}  // namespace noxcast
