#include "epihmm/week.hpp"

#include <cctype>
#include <cstdio>

#include "epihmm/errors.hpp"

namespace epihmm {

IsoWeek parse_iso_week(const std::string &text, bool allow_week53) {
  // Strict "YYYY-Www" with exactly four year digits and two week digits.
  auto bad = [&]() -> IsoWeek {
    throw DataError("invalid year-week '" + text + "' (expected YYYY-Www)");
  };
  if (text.size() != 8 || text[4] != '-' || text[5] != 'W') return bad();
  for (int i : {0, 1, 2, 3, 6, 7})
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return bad();
  const int year = (text[0] - '0') * 1000 + (text[1] - '0') * 100 +
                   (text[2] - '0') * 10 + (text[3] - '0');
  const int week = (text[6] - '0') * 10 + (text[7] - '0');
  const int max_week = allow_week53 ? 53 : 52;
  if (week < 1 || week > max_week)
    throw DataError("week number out of range in '" + text + "'");
  return IsoWeek{year, week};
}

std::string format_iso_week(const IsoWeek &w) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-W%02d", w.year, w.week);
  return buf;
}

long serial_of(const IsoWeek &w) { return static_cast<long>(w.year) * 52 + (w.week - 1); }

IsoWeek week_from_serial(long serial) {
  IsoWeek w;
  w.year = static_cast<int>(serial / 52);
  w.week = static_cast<int>(serial % 52) + 1;
  return w;
}

IsoWeek add_weeks(const IsoWeek &w, long n) { return week_from_serial(serial_of(w) + n); }

WeekIndex index_on_grid(const IsoWeek &start, const IsoWeek &w) {
  return static_cast<WeekIndex>(serial_of(w) - serial_of(start) + 1);
}

IsoWeek week_at_index(const IsoWeek &start, WeekIndex t) {
  return week_from_serial(serial_of(start) + t - 1);
}

} // namespace epihmm
