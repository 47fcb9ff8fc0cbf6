#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "msi/metrics.hpp"
#include "msi/raster.hpp"

namespace msi {

/// Equal-width bins tiling [lo, hi]. Counts are real-valued so smoothed
/// histograms share the type.
struct Histogram {
  double lo = -1.0;
  double hi = 1.0;
  double bin_width = 0.01;
  std::vector<double> counts;

  std::size_t bins() const noexcept { return counts.size(); }
  /// Left edge of bin k; edge(bins()) == hi.
  double edge(std::size_t k) const noexcept;
  double total() const noexcept;
  /// Bin holding v, with v == hi folded into the last bin. Values outside
  /// [lo, hi] map to bins().
  std::size_t bin_of(double v) const noexcept;
};

/// Closed interval [lo, hi] in index units.
struct ThresholdRange {
  double lo = -1.0;
  double hi = 1.0;
  friend bool operator==(const ThresholdRange&, const ThresholdRange&) = default;
};

enum class RangePolicy { PeakExpansion, Exhaustive };

struct ThresholdConfig {
  std::size_t bins = 200;
  double sigma_bins = 2.0;
  double tau = 0.5;
  RangePolicy policy = RangePolicy::PeakExpansion;
};

struct ThresholdEvalResult {
  std::string index_id;
  std::string feature_label;
  ThresholdRange range;
  ConfusionCounts confusion;
  double accuracy = 0.0;  // fraction, equals accuracy(confusion)
};

/// Histogram over [-1, 1] of valid map values at feature pixels. Throws
/// DomainError when no feature pixel holds a valid value.
Histogram masked_histogram(const IndexMap& map, const FeatureMask& mask, std::size_t bins);
/// Single-threaded reference for masked_histogram.
Histogram masked_histogram_serial(const IndexMap& map, const FeatureMask& mask,
                                  std::size_t bins);

/// Convolution with a unit-mass Gaussian truncated at +-4 sigma, with
/// half-sample reflection at both ends. Mass is preserved.
Histogram gaussian_smooth(const Histogram& h, double sigma_bins);

/// Peak expansion: from the highest smoothed bin (lowest on ties), grow
/// while neighbours hold at least tau x peak.
ThresholdRange select_peak_range(const Histogram& smoothed, double tau);

/// Bin-edge interval [edge(i), edge(j)], i < j, that maximises accuracy of
/// apply_threshold against truth; ties go to the narrower, then lower,
/// interval.
ThresholdRange select_exhaustive_range(const Histogram& smoothed, const IndexMap& map,
                                       const FeatureMask& truth);

ThresholdRange select_range(const Histogram& smoothed, RangePolicy policy, const IndexMap& map,
                            const FeatureMask& truth, double tau);

/// 1 where lo <= value <= hi, 0 elsewhere, ignore for nodata.
FeatureMask apply_threshold(const IndexMap& map, const ThresholdRange& range);

/// Histogram, smoothing, selection, segmentation and scoring. Accuracy is
/// over every comparable pixel of the region.
ThresholdEvalResult evaluate_index(const IndexMap& map, const FeatureMask& truth,
                                   const ThresholdConfig& config,
                                   const std::string& feature_label = "feature");

}  // namespace msi
