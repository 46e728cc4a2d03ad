#include "epihmm/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "epihmm/errors.hpp"
#include "epihmm/week.hpp"

namespace epihmm {

namespace {

std::vector<std::string> split_fields(const std::string &line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

[[noreturn]] void fail_at(const std::string &path, long line_no, const std::string &message) {
  throw DataError(path + ":" + std::to_string(line_no) + ": " + message);
}

long parse_count_field(const std::string &text, const std::string &path, long line_no) {
  long value = 0;
  const char *first = text.data();
  const char *last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || value < 0)
    fail_at(path, line_no, "count must be a non-negative integer, got '" + text + "'");
  return value;
}

struct CsvReader {
  std::ifstream in;
  std::string path;
  long line_no = 0;

  explicit CsvReader(const std::string &p, const char *expected_header) : in(p), path(p) {
    if (!in) throw DataError("cannot open " + p);
    std::string header;
    if (!std::getline(in, header))
      fail_at(path, 1, std::string("expected header '") + expected_header + "'");
    ++line_no;
    if (strip_cr(header) != expected_header)
      fail_at(path, 1, std::string("expected header '") + expected_header + "', got '" +
                           strip_cr(header) + "'");
  }

  bool next_row(std::vector<std::string> &fields, size_t n_fields) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      line = strip_cr(line);
      if (line.empty()) continue;
      fields = split_fields(line);
      if (fields.size() != n_fields)
        fail_at(path, line_no,
                "expected " + std::to_string(n_fields) + " fields, got " +
                    std::to_string(fields.size()));
      return true;
    }
    return false;
  }
};

/// Parses a year-week cell, folding W53 onto W52 of the same year.
long parse_week_serial(const std::string &text, const std::string &path, long line_no,
                       bool *folded) {
  IsoWeek w;
  try {
    w = parse_iso_week(text, true);
  } catch (const DataError &e) {
    fail_at(path, line_no, e.what());
  }
  *folded = w.week == 53;
  if (w.week == 53) w.week = 52;
  return serial_of(w);
}

} // namespace

SeriesGroup read_group_csv(const std::string &counts_path, const std::string &labels_path,
                           IngestWarnings *warnings) {
  struct CellSeen {
    bool plain = false;  // a W1..W52 row landed here
    bool folded = false; // a W53 row folded onto it
  };
  std::map<std::string, std::map<long, long>> counts;
  std::map<std::string, std::map<long, CellSeen>> seen;
  long min_serial = 0, max_serial = 0;
  bool any = false;

  CsvReader reader(counts_path, "series_id,year_week,count");
  std::vector<std::string> fields;
  while (reader.next_row(fields, 3)) {
    const std::string &sid = fields[0];
    if (sid.empty()) fail_at(counts_path, reader.line_no, "empty series_id");
    bool folded = false;
    const long serial = parse_week_serial(fields[1], counts_path, reader.line_no, &folded);
    const long count = parse_count_field(fields[2], counts_path, reader.line_no);

    CellSeen &cell = seen[sid][serial];
    if ((folded && cell.folded) || (!folded && cell.plain))
      fail_at(counts_path, reader.line_no, "duplicate week " + fields[1] + " for series " + sid);
    (folded ? cell.folded : cell.plain) = true;
    counts[sid][serial] += count;
    if (folded && warnings) warnings->folded_week53[sid] += 1;
    if (!any || serial < min_serial) min_serial = serial;
    if (!any || serial > max_serial) max_serial = serial;
    any = true;
  }
  if (!any) throw DataError(counts_path + ": no data rows");

  const int grid_len = static_cast<int>(max_serial - min_serial + 1);
  const IsoWeek start = week_from_serial(min_serial);
  const Label default_label = labels_path.empty() ? Label::Unknown : Label::Endemic;

  SeriesGroup group;
  for (const auto &[sid, series_counts] : counts) {
    SurveillanceSeries s;
    s.series_id = sid;
    s.start_week = start;
    s.counts.assign(static_cast<size_t>(grid_len), 0);
    s.labels.assign(static_cast<size_t>(grid_len), default_label);
    for (const auto &[serial, count] : series_counts)
      s.counts[static_cast<size_t>(serial - min_serial)] = static_cast<int>(count);
    const int filled = grid_len - static_cast<int>(series_counts.size());
    if (filled > 0 && warnings) warnings->zero_filled_weeks[sid] = filled;
    group.series.push_back(std::move(s));
  }

  if (!labels_path.empty()) {
    std::map<std::string, std::map<long, CellSeen>> label_seen;
    std::map<std::string, size_t> index_of;
    for (size_t i = 0; i < group.series.size(); ++i) index_of[group.series[i].series_id] = i;

    CsvReader label_reader(labels_path, "series_id,year_week,label");
    while (label_reader.next_row(fields, 3)) {
      const std::string &sid = fields[0];
      const auto idx = index_of.find(sid);
      if (idx == index_of.end())
        fail_at(labels_path, label_reader.line_no, "series " + sid + " not in the counts file");
      bool folded = false;
      const long serial = parse_week_serial(fields[1], labels_path, label_reader.line_no, &folded);
      if (serial < min_serial || serial > max_serial)
        fail_at(labels_path, label_reader.line_no,
                "week " + fields[1] + " outside the counts grid");
      if (fields[2] != "0" && fields[2] != "1")
        fail_at(labels_path, label_reader.line_no, "label must be 0 or 1, got '" + fields[2] + "'");

      CellSeen &cell = label_seen[sid][serial];
      if ((folded && cell.folded) || (!folded && cell.plain))
        fail_at(labels_path, label_reader.line_no,
                "duplicate week " + fields[1] + " for series " + sid);
      (folded ? cell.folded : cell.plain) = true;
      // An outbreak label wins when W52 and W53 fold onto the same slot.
      if (fields[2] == "1")
        group.series[idx->second].labels[static_cast<size_t>(serial - min_serial)] =
            Label::Outbreak;
    }
  }

  group.validate();
  return group;
}

std::map<std::pair<std::string, long>, int>
read_labels_raw(const std::vector<std::string> &paths) {
  std::map<std::pair<std::string, long>, int> labels;
  for (const auto &path : paths) {
    std::map<std::pair<std::string, long>, std::pair<bool, bool>> seen; // plain, folded
    CsvReader reader(path, "series_id,year_week,label");
    std::vector<std::string> fields;
    while (reader.next_row(fields, 3)) {
      const std::string &sid = fields[0];
      if (sid.empty()) fail_at(path, reader.line_no, "empty series_id");
      bool folded = false;
      const long serial = parse_week_serial(fields[1], path, reader.line_no, &folded);
      if (fields[2] != "0" && fields[2] != "1")
        fail_at(path, reader.line_no, "label must be 0 or 1, got '" + fields[2] + "'");
      auto &cell = seen[{sid, serial}];
      if (folded ? cell.second : cell.first)
        fail_at(path, reader.line_no, "duplicate week " + fields[1] + " for series " + sid);
      (folded ? cell.second : cell.first) = true;
      int &slot = labels[{sid, serial}];
      if (fields[2] == "1") slot = 1;
    }
  }
  return labels;
}

void write_counts_csv(const std::string &path, const SeriesGroup &group) {
  std::vector<const SurveillanceSeries *> ordered;
  for (const auto &s : group.series) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto *a, const auto *b) { return a->series_id < b->series_id; });
  std::string out = "series_id,year_week,count\n";
  for (const auto *s : ordered) {
    for (WeekIndex t = 1; t <= s->length(); ++t) {
      out += s->series_id;
      out += ',';
      out += format_iso_week(week_at_index(s->start_week, t));
      out += ',';
      out += std::to_string(s->count_at(t));
      out += '\n';
    }
  }
  write_text_atomic(path, out);
}

void write_labels_csv(const std::string &path, const SeriesGroup &group) {
  std::vector<const SurveillanceSeries *> ordered;
  for (const auto &s : group.series) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto *a, const auto *b) { return a->series_id < b->series_id; });
  std::string out = "series_id,year_week,label\n";
  for (const auto *s : ordered) {
    for (WeekIndex t = 1; t <= s->length(); ++t) {
      const Label label = s->label_at(t);
      if (!is_known(label)) continue;
      out += s->series_id;
      out += ',';
      out += format_iso_week(week_at_index(s->start_week, t));
      out += ',';
      out += label == Label::Outbreak ? '1' : '0';
      out += '\n';
    }
  }
  write_text_atomic(path, out);
}

void write_scores_csv(const std::string &path, const std::vector<ScoreRow> &rows) {
  std::string out = "series_id,year_week,score,alarm\n";
  for (const auto &row : rows) {
    out += row.series_id;
    out += ',';
    out += format_iso_week(row.week);
    out += ',';
    out += format_double(row.score);
    out += ',';
    out += row.alarm ? '1' : '0';
    out += '\n';
  }
  write_text_atomic(path, out);
}

std::vector<ScoreRow> read_scores_csv(const std::string &path) {
  std::vector<ScoreRow> rows;
  CsvReader reader(path, "series_id,year_week,score,alarm");
  std::vector<std::string> fields;
  while (reader.next_row(fields, 4)) {
    ScoreRow row;
    row.series_id = fields[0];
    if (row.series_id.empty()) fail_at(path, reader.line_no, "empty series_id");
    try {
      row.week = parse_iso_week(fields[1], true);
    } catch (const DataError &e) {
      fail_at(path, reader.line_no, e.what());
    }
    row.score = parse_double(fields[2], path + ":" + std::to_string(reader.line_no));
    if (fields[3] != "0" && fields[3] != "1")
      fail_at(path, reader.line_no, "alarm must be 0 or 1, got '" + fields[3] + "'");
    row.alarm = fields[3] == "1";
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw NumericError("format_double failed");
  return std::string(buf, ptr);
}

double parse_double(const std::string &text, const std::string &context) {
  double value = 0.0;
  const char *first = text.data();
  const char *last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw DataError(context + ": malformed number '" + text + "'");
  return value;
}

void write_text_atomic(const std::string &path, const std::string &content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw DataError("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw DataError("cannot rename " + tmp + " to " + path);
  }
}

std::string read_text_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

} // namespace epihmm
