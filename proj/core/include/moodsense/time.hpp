#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace moodsense {

/// Milliseconds since 1970-01-01T00:00:00Z.
using TimestampMs = std::int64_t;

inline constexpr TimestampMs kMsPerMinute = 60'000;
inline constexpr TimestampMs kMsPerDay = 86'400'000;

/// A local calendar day, stored as days since 1970-01-01.
struct LocalDate {
  std::int32_t days = 0;

  constexpr LocalDate operator+(int n) const { return LocalDate{days + n}; }
  constexpr LocalDate operator-(int n) const { return LocalDate{days - n}; }
  constexpr int operator-(LocalDate other) const { return days - other.days; }
  constexpr auto operator<=>(const LocalDate&) const = default;
};

/// RFC 3339 timestamp: `YYYY-MM-DDTHH:MM:SS[.fraction](Z|±HH:MM)`.
/// Fractions beyond milliseconds are truncated.
std::optional<TimestampMs> parse_rfc3339(std::string_view text);

/// Canonical form `YYYY-MM-DDTHH:MM:SS.mmmZ`.
std::string format_rfc3339(TimestampMs t);

std::optional<LocalDate> parse_date(std::string_view text);
std::string format_date(LocalDate d);

LocalDate local_date_of(TimestampMs t, int utc_offset_minutes);

/// Minutes after local midnight, in [0, 1440).
int local_minute_of_day(TimestampMs t, int utc_offset_minutes);

/// UTC instant of local midnight starting `d`.
TimestampMs local_midnight_utc(LocalDate d, int utc_offset_minutes);

}  // namespace moodsense
