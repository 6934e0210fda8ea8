#include "moodsense/time.hpp"

#include <chrono>

#include <fmt/format.h>

namespace moodsense {
namespace {

namespace chr = std::chrono;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

bool read_digits(std::string_view s, std::size_t pos, std::size_t count, int& out) {
  if (pos + count > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    const char c = s[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

std::optional<chr::sys_days> civil_day(int y, int m, int d) {
  const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)},
                                chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return chr::sys_days{ymd};
}

}  // namespace

std::optional<LocalDate> parse_date(std::string_view s) {
  int y = 0, m = 0, d = 0;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!read_digits(s, 0, 4, y) || !read_digits(s, 5, 2, m) || !read_digits(s, 8, 2, d)) {
    return std::nullopt;
  }
  const auto day = civil_day(y, m, d);
  if (!day) return std::nullopt;
  return LocalDate{static_cast<std::int32_t>(day->time_since_epoch().count())};
}

std::string format_date(LocalDate d) {
  const chr::year_month_day ymd{chr::sys_days{chr::days{d.days}}};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

std::optional<TimestampMs> parse_rfc3339(std::string_view s) {
  if (s.size() < 20) return std::nullopt;
  const auto date = parse_date(s.substr(0, 10));
  if (!date) return std::nullopt;
  if (s[10] != 'T' && s[10] != 't') return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  if (!read_digits(s, 11, 2, hh) || s[13] != ':' || !read_digits(s, 14, 2, mm) || s[16] != ':' ||
      !read_digits(s, 17, 2, ss)) {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;

  std::size_t pos = 19;
  int millis = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    int scale = 100;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      millis += (s[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
    if (pos == start) return std::nullopt;
  }
  if (pos >= s.size()) return std::nullopt;

  std::int64_t offset_min = 0;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    const int sign = s[pos] == '-' ? -1 : 1;
    int oh = 0, om = 0;
    if (!read_digits(s, pos + 1, 2, oh) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
        !read_digits(s, pos + 4, 2, om)) {
      return std::nullopt;
    }
    if (oh > 23 || om > 59) return std::nullopt;
    offset_min = sign * (oh * 60 + om);
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;

  const std::int64_t local_ms = static_cast<std::int64_t>(date->days) * kMsPerDay +
                                ((hh * 60 + mm) * 60 + ss) * 1000LL + millis;
  return local_ms - offset_min * kMsPerMinute;
}

std::string format_rfc3339(TimestampMs t) {
  const std::int64_t day = floor_div(t, kMsPerDay);
  const std::int64_t rem = t - day * kMsPerDay;
  const auto secs = rem / 1000;
  return fmt::format("{}T{:02d}:{:02d}:{:02d}.{:03d}Z", format_date(LocalDate{static_cast<std::int32_t>(day)}),
                     secs / 3600, (secs / 60) % 60, secs % 60, rem % 1000);
}

LocalDate local_date_of(TimestampMs t, int utc_offset_minutes) {
  return LocalDate{
      static_cast<std::int32_t>(floor_div(t + utc_offset_minutes * kMsPerMinute, kMsPerDay))};
}

int local_minute_of_day(TimestampMs t, int utc_offset_minutes) {
  const std::int64_t local = t + utc_offset_minutes * kMsPerMinute;
  const std::int64_t rem = local - floor_div(local, kMsPerDay) * kMsPerDay;
  return static_cast<int>(rem / kMsPerMinute);
}

TimestampMs local_midnight_utc(LocalDate d, int utc_offset_minutes) {
  return static_cast<TimestampMs>(d.days) * kMsPerDay - utc_offset_minutes * kMsPerMinute;
}

}  // namespace moodsense
