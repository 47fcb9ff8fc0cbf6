#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msi/threshold.hpp"

namespace msi::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kFatal = 1, kPartial = 2 };

// ---------------------------------------------------------------------------
// CSV

/// Comma-separated table with a header row. No quoting: writers replace
/// commas and newlines inside fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position; throws FormatError when absent.
  std::size_t column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const noexcept;
};

CsvTable read_csv(const fs::path& path);
CsvTable parse_csv(std::string_view text);
void write_csv(const CsvTable& table, const fs::path& path);
std::string to_csv(const CsvTable& table);

/// "%.10g"; NaN prints as "nan".
std::string format_general(double v);
/// Fixed point with the given decimals.
std::string format_fixed(double v, int decimals);
/// Throws FormatError unless the whole field is a number.
double parse_number(std::string_view field);
/// Replaces separators that would break a row.
std::string sanitize_field(std::string_view text);

// ---------------------------------------------------------------------------
// Fixture rows

struct FixtureRow {
  std::string index_id;
  std::string region;
  std::string feature;
  double range_lo = 0.0;
  double range_hi = 0.0;
  double accuracy_percent = 0.0;
};

inline constexpr std::string_view kFixtureHeader =
    "index_id,region,feature,range_lo,range_hi,accuracy_percent";

/// Accepts "accuracy_percent" or "accuracy" for the last column. Throws
/// FormatError on a missing column or a violated row invariant.
std::vector<FixtureRow> fixture_rows(const CsvTable& table);
std::vector<FixtureRow> read_fixture(const fs::path& path);
CsvTable fixture_table(const std::vector<FixtureRow>& rows);

/// Jaccard index of two closed intervals; two equal points score 1.
double interval_jaccard(double a_lo, double a_hi, double b_lo, double b_hi);

struct ReportRow {
  std::string index_id;
  std::string region;
  std::string feature;
  double result_accuracy = 0.0;
  double fixture_accuracy = 0.0;
  double delta = 0.0;  // result - fixture, percentage points
  double jaccard = 0.0;
};

struct FeatureSummary {
  std::string feature;
  std::size_t rows = 0;
  double mean_abs_delta = 0.0;
  double mean_jaccard = 0.0;
};

struct Report {
  std::vector<ReportRow> rows;            // fixture order
  std::vector<FeatureSummary> summary;    // first-seen feature order
  std::size_t unmatched_results = 0;
  std::size_t unmatched_fixtures = 0;
};

/// Rows are matched on (index_id, region, feature).
Report build_report(const std::vector<FixtureRow>& results,
                    const std::vector<FixtureRow>& fixtures);

// ---------------------------------------------------------------------------
// Commands. Each writes into the output directory and returns an exit code;
// errors below the fatal level are logged to `log`.

struct GlobalOptions {
  std::string profile = "sentinel2";
  fs::path out = ".";
  int threads = 0;  // 0 keeps the OpenMP default
  bool keep_going = false;
};

/// Catalog and context inputs shared by compute and evaluate.
struct IndexOptions {
  std::vector<std::string> indices;
  bool all = false;
  std::vector<std::string> params;  // "name=value" or "ID.name=value"
  std::optional<fs::path> updm;     // container with C_V, C_S, C_W, C_4
  std::optional<fs::path> muwi;     // JSON coefficients
  std::string swir = "SWIR1";
  std::string swir_long = "SWIR1";
};

struct IngestOptions {
  fs::path raw;
};
int cmd_ingest(const GlobalOptions& g, const IngestOptions& o, std::ostream& log);

struct ComputeOptions {
  fs::path stack;
  IndexOptions index;
};
/// <ID>.json/.bin per index plus stats.csv.
int cmd_compute(const GlobalOptions& g, const ComputeOptions& o, std::ostream& log);

struct RenderOptions {
  fs::path map;
  std::optional<fs::path> output;  // default <out>/<stem>.pgm
};
int cmd_render(const GlobalOptions& g, const RenderOptions& o, std::ostream& log);

struct CirOptions {
  fs::path stack;
  std::optional<fs::path> output;  // default <out>/cir.ppm
};
int cmd_cir(const GlobalOptions& g, const CirOptions& o, std::ostream& log);

struct EvaluateOptions {
  fs::path stack;
  IndexOptions index;
  std::vector<std::pair<std::string, fs::path>> masks;  // feature label, mask header
  std::string region = "synthetic";
  ThresholdConfig threshold;
  bool normalize = true;
};
/// evaluate.csv: index_id,region,feature,range_lo,range_hi,tp,tn,fp,fn,accuracy
/// with accuracy in percent, so the file also reads as a fixture table.
int cmd_evaluate(const GlobalOptions& g, const EvaluateOptions& o, std::ostream& log);

struct LaiOptions {
  fs::path stack;
  std::string model = "blend";
  std::vector<std::string> params;
  std::string swir = "SWIR1";
};
/// LAI_<model>.json/.bin plus lai_stats.csv.
int cmd_lai(const GlobalOptions& g, const LaiOptions& o, std::ostream& log);

struct MetricsOptions {
  std::optional<fs::path> samples;    // CSV with value,label columns
  std::optional<fs::path> predicted;  // mask header
  std::optional<fs::path> truth;      // mask header
};
/// metrics.csv: separability and tests for every label pair, then the
/// omnibus tests; classification.csv when masks are given.
int cmd_metrics(const GlobalOptions& g, const MetricsOptions& o, std::ostream& log);

struct ReportOptions {
  fs::path results;
  fs::path fixture;
};
/// report.csv and report_summary.csv.
int cmd_report(const GlobalOptions& g, const ReportOptions& o, std::ostream& log);

struct SynthOptions {
  fs::path spec;
};
int cmd_synth(const GlobalOptions& g, const SynthOptions& o, std::ostream& log);

}  // namespace msi::cli
