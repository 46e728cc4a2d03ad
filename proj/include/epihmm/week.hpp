#ifndef EPIHMM_WEEK_HPP
#define EPIHMM_WEEK_HPP

#include <string>

namespace epihmm {

/// 1-based position on a contiguous weekly grid.
using WeekIndex = int;

/// Calendar anchor of a week grid, written as "YYYY-Www".
///
/// The grid uses simplified 52-week years: the annual harmonic has period 52
/// and week numbers run 01..52. Input rows carrying W53 are folded into W52
/// at ingestion.
struct IsoWeek {
  int year = 0;
  int week = 0; // 1..52

  bool operator==(const IsoWeek &) const = default;
  auto operator<=>(const IsoWeek &) const = default;
};

/// Parses "YYYY-Www". Weeks 01..53 are accepted when allow_week53 is set
/// (the caller folds 53 into 52); otherwise 01..52.
IsoWeek parse_iso_week(const std::string &text, bool allow_week53 = false);

std::string format_iso_week(const IsoWeek &w);

/// Weeks elapsed since year 0 week 1 on the 52-week grid.
long serial_of(const IsoWeek &w);

IsoWeek week_from_serial(long serial);

/// w advanced by n weeks (n may be negative).
IsoWeek add_weeks(const IsoWeek &w, long n);

/// 1-based index of `w` on the grid anchored at `start` (start itself is 1).
WeekIndex index_on_grid(const IsoWeek &start, const IsoWeek &w);

/// Inverse of index_on_grid.
IsoWeek week_at_index(const IsoWeek &start, WeekIndex t);

} // namespace epihmm

#endif
