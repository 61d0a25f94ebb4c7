#pragma once

#include <cstdint>
#include <string>

namespace imputelab {

/// Calendar date handled as days since 1970-01-01 (proleptic Gregorian).
struct date {
  std::int64_t days = 0;

  friend bool operator==(const date& a, const date& b) { return a.days == b.days; }
  friend bool operator!=(const date& a, const date& b) { return a.days != b.days; }
  friend bool operator<(const date& a, const date& b) { return a.days < b.days; }
  friend bool operator<=(const date& a, const date& b) { return a.days <= b.days; }
  friend bool operator>(const date& a, const date& b) { return a.days > b.days; }
  friend bool operator>=(const date& a, const date& b) { return a.days >= b.days; }
};

std::int64_t days_from_civil(int y, int m, int d);
void civil_from_days(std::int64_t z, int& y, int& m, int& d);

/// Strict YYYY-MM-DD parse; raises errc::malformed_row on any violation.
date parse_date(const std::string& s);
std::string format_date(const date& d);

}  // namespace imputelab
