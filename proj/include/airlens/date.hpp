#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace airlens {

// Calendar date without time of day (proleptic Gregorian).
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  int quarter() const noexcept { return (month - 1) / 3 + 1; }

  // Strict ISO-8601 calendar date "YYYY-MM-DD"; rejects impossible days.
  static std::optional<Date> parse(std::string_view iso) noexcept;
  std::string to_string() const;
};

struct DateRange {
  Date from;
  Date to;

  bool contains(const Date& d) const noexcept { return from <= d && d <= to; }
  bool operator==(const DateRange&) const = default;
};

bool is_valid_date(int year, int month, int day) noexcept;

// Default corpus window: Q1 2016 through Q1 2025.
inline constexpr Date kCorpusStart{2016, 1, 1};
inline constexpr Date kCorpusEnd{2025, 3, 31};

}  // namespace airlens
