#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace kgr {

/// Calendar date with day precision, stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;

  /// Accepts `YYYY-MM-DD` or a bare `YYYY` (canonicalized to January 1).
  static std::optional<Date> parse(std::string_view text);

  /// Throws ValidationError when the triple is not a real calendar day.
  static Date from_ymd(int year, unsigned month, unsigned day);

  static constexpr Date from_days(std::int32_t days) {
    Date d;
    d.days_ = days;
    return d;
  }

  int year() const;
  unsigned month() const;
  unsigned day() const;
  constexpr std::int32_t days_since_epoch() const { return days_; }

  /// Canonical `YYYY-MM-DD`.
  std::string str() const;

  friend constexpr auto operator<=>(Date, Date) = default;

 private:
  std::int32_t days_ = 0;
};

}  // namespace kgr
