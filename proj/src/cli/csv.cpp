#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "msi/cli.hpp"
#include "msi/error.hpp"

namespace msi::cli {

std::optional<std::size_t> CsvTable::find_column(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      return i;
    }
  }
  return std::nullopt;
}

std::size_t CsvTable::column(std::string_view name) const {
  if (auto c = find_column(name)) {
    return *c;
  }
  throw FormatError("CSV has no column '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  bool first = true;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (first && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") {
      line.remove_prefix(3);
    }
    if (line.empty()) {
      continue;
    }
    auto fields = split_line(line);
    if (first) {
      t.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != t.header.size()) {
        throw FormatError("CSV line " + std::to_string(line_no) + " has " +
                          std::to_string(fields.size()) + " fields, header has " +
                          std::to_string(t.header.size()));
      }
      t.rows.push_back(std::move(fields));
    }
  }
  if (first) {
    throw FormatError("CSV is empty");
  }
  return t;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) {
    line(r);
  }
  return out;
}

void write_csv(const CsvTable& table, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << to_csv(table);
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

std::string format_general(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  std::string s = buf;
  return s == "-0" ? "0" : s;
}

std::string format_fixed(double v, int decimals) {
  if (std::isnan(v)) {
    return "nan";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) {
    s.erase(0, 1);
  }
  return s;
}

double parse_number(std::string_view field) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw FormatError("not a number: '" + std::string(field) + "'");
  }
  return v;
}

std::string sanitize_field(std::string_view text) {
  std::string s(text);
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

std::vector<FixtureRow> fixture_rows(const CsvTable& t) {
  const auto c_id = t.column("index_id");
  const auto c_region = t.column("region");
  const auto c_feature = t.column("feature");
  const auto c_lo = t.column("range_lo");
  const auto c_hi = t.column("range_hi");
  auto c_acc = t.find_column("accuracy_percent");
  if (!c_acc) {
    c_acc = t.find_column("accuracy");
  }
  if (!c_acc) {
    throw FormatError("CSV has no accuracy_percent column");
  }
  std::vector<FixtureRow> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    FixtureRow row{r[c_id], r[c_region], r[c_feature], parse_number(r[c_lo]),
                   parse_number(r[c_hi]), parse_number(r[*c_acc])};
    if (!(row.range_lo <= row.range_hi)) {
      throw FormatError("row " + std::to_string(i + 1) + " has range_lo > range_hi");
    }
    if (!(row.accuracy_percent >= 0.0 && row.accuracy_percent <= 100.0)) {
      throw FormatError("row " + std::to_string(i + 1) + " has accuracy outside [0, 100]");
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<FixtureRow> read_fixture(const fs::path& path) { return fixture_rows(read_csv(path)); }

CsvTable fixture_table(const std::vector<FixtureRow>& rows) {
  CsvTable t;
  t.header = split_line(kFixtureHeader);
  for (const auto& r : rows) {
    t.rows.push_back({sanitize_field(r.index_id), sanitize_field(r.region),
                      sanitize_field(r.feature), format_general(r.range_lo),
                      format_general(r.range_hi), format_fixed(r.accuracy_percent, 2)});
  }
  return t;
}

double interval_jaccard(double a_lo, double a_hi, double b_lo, double b_hi) {
  const double inter = std::max(0.0, std::min(a_hi, b_hi) - std::max(a_lo, b_lo));
  const double uni = (a_hi - a_lo) + (b_hi - b_lo) - inter;
  if (uni <= 0.0) {
    return (a_lo == b_lo && a_hi == b_hi) ? 1.0 : 0.0;
  }
  return inter / uni;
}

Report build_report(const std::vector<FixtureRow>& results,
                    const std::vector<FixtureRow>& fixtures) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, const FixtureRow*> by_key;
  for (const auto& r : results) {
    if (!by_key.emplace(Key{r.index_id, r.region, r.feature}, &r).second) {
      throw FormatError("results repeat the row " + r.index_id + "/" + r.region + "/" +
                        r.feature);
    }
  }
  Report rep;
  std::size_t matched = 0;
  std::vector<std::string> features;
  std::map<std::string, FeatureSummary> sums;
  for (const auto& f : fixtures) {
    auto it = by_key.find(Key{f.index_id, f.region, f.feature});
    if (it == by_key.end()) {
      ++rep.unmatched_fixtures;
      continue;
    }
    ++matched;
    const FixtureRow& r = *it->second;
    ReportRow row{f.index_id,
                  f.region,
                  f.feature,
                  r.accuracy_percent,
                  f.accuracy_percent,
                  r.accuracy_percent - f.accuracy_percent,
                  interval_jaccard(r.range_lo, r.range_hi, f.range_lo, f.range_hi)};
    auto [s, fresh] = sums.try_emplace(f.feature);
    if (fresh) {
      s->second.feature = f.feature;
      features.push_back(f.feature);
    }
    s->second.rows += 1;
    s->second.mean_abs_delta += std::abs(row.delta);
    s->second.mean_jaccard += row.jaccard;
    rep.rows.push_back(std::move(row));
  }
  rep.unmatched_results = results.size() - std::min(matched, results.size());
  for (const auto& name : features) {
    FeatureSummary s = sums.at(name);
    s.mean_abs_delta /= static_cast<double>(s.rows);
    s.mean_jaccard /= static_cast<double>(s.rows);
    rep.summary.push_back(s);
  }
  return rep;
}

}  // namespace msi::cli
