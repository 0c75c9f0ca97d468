#include "kgr/date.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "kgr/error.hpp"

namespace kgr {
namespace {

using std::chrono::day;
using std::chrono::month;
using std::chrono::sys_days;
using std::chrono::year;
using std::chrono::year_month_day;

bool parse_fixed(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

year_month_day to_ymd(std::int32_t days) {
  return year_month_day{sys_days{std::chrono::days{days}}};
}

}  // namespace

std::optional<Date> Date::parse(std::string_view text) {
  int y = 0;
  int m = 1;
  int d = 1;
  if (text.size() == 4) {
    if (!parse_fixed(text, y)) return std::nullopt;
  } else if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    if (!parse_fixed(text.substr(0, 4), y) || !parse_fixed(text.substr(5, 2), m) ||
        !parse_fixed(text.substr(8, 2), d)) {
      return std::nullopt;
    }
  } else {
    return std::nullopt;
  }
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                 std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return from_days(static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count()));
}

Date Date::from_ymd(int y, unsigned m, unsigned d) {
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) {
    throw ValidationError("invalid calendar date " + std::to_string(y) + "-" + std::to_string(m) +
                          "-" + std::to_string(d));
  }
  return from_days(static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count()));
}

int Date::year() const { return static_cast<int>(to_ymd(days_).year()); }
unsigned Date::month() const { return static_cast<unsigned>(to_ymd(days_).month()); }
unsigned Date::day() const { return static_cast<unsigned>(to_ymd(days_).day()); }

std::string Date::str() const {
  auto ymd = to_ymd(days_);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace kgr
