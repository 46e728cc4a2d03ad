#pragma once

#include <map>
#include <string>
#include <vector>

#include "epihmm/timeseries.hpp"

namespace epihmm {

struct IngestWarnings {
  std::map<std::string, int> zero_filled_weeks; // grid weeks absent from the counts file
  std::map<std::string, int> folded_week53;     // W53 rows folded into W52
};

/// Reads the counts CSV (header `series_id,year_week,count`) and an optional
/// labels CSV (header `series_id,year_week,label`, label in {0,1}) onto one
/// contiguous grid spanning the counts file's full week range. Weeks missing
/// from the counts file get count 0 with a per-series warning tally. With a
/// labels file every week is labeled (unlisted weeks are endemic); without
/// one all labels are unknown. ISO week 53 folds into week 52 of the same
/// year: counts add, an outbreak label wins. Duplicate keys and schema
/// violations raise DataError with the 1-based line number. Series are
/// ordered by id.
SeriesGroup read_group_csv(const std::string &counts_path, const std::string &labels_path = "",
                           IngestWarnings *warnings = nullptr);

/// Rows sorted by (series_id, week); bit-exact re-read.
void write_counts_csv(const std::string &path, const SeriesGroup &group);

/// One row per known-labeled week. Unknown labels are omitted and would
/// re-read as endemic, so round-tripping expects fully labeled groups.
void write_labels_csv(const std::string &path, const SeriesGroup &group);

/// Sparse label lookup keyed by (series_id, week serial), merged over
/// files; weeks a file does not list are endemic by convention, so only
/// listed weeks appear. W53 folds onto W52 with outbreak winning.
std::map<std::pair<std::string, long>, int>
read_labels_raw(const std::vector<std::string> &paths);

struct ScoreRow {
  std::string series_id;
  IsoWeek week;
  double score = 0.0;
  bool alarm = false;
};

/// Header `series_id,year_week,score,alarm`; scores in shortest
/// round-trip form, alarm as 0/1.
void write_scores_csv(const std::string &path, const std::vector<ScoreRow> &rows);

std::vector<ScoreRow> read_scores_csv(const std::string &path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Full-string parse; DataError mentioning context on failure.
double parse_double(const std::string &text, const std::string &context);

/// Writes through a temp file in the same directory, then renames.
void write_text_atomic(const std::string &path, const std::string &content);

std::string read_text_file(const std::string &path);

} // namespace epihmm
