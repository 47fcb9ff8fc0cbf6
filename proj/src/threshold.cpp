#include "msi/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "msi/error.hpp"

namespace msi {

double Histogram::edge(std::size_t k) const noexcept {
  if (k >= counts.size()) {
    return hi;
  }
  return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(counts.size());
}

double Histogram::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), 0.0);
}

std::size_t Histogram::bin_of(double v) const noexcept {
  const std::size_t n = counts.size();
  if (!(v >= lo && v <= hi) || n == 0) {
    return n;
  }
  if (v == hi) {
    return n - 1;
  }
  auto k = static_cast<std::size_t>(std::floor((v - lo) / bin_width));
  k = std::min(k, n - 1);
  while (k > 0 && v < edge(k)) {
    --k;
  }
  while (k + 1 < n && v >= edge(k + 1)) {
    ++k;
  }
  return k;
}

namespace {

Histogram empty_histogram(std::size_t bins) {
  if (bins == 0) {
    throw DomainError("histogram needs at least one bin");
  }
  Histogram h;
  h.lo = -1.0;
  h.hi = 1.0;
  h.bin_width = (h.hi - h.lo) / static_cast<double>(bins);
  h.counts.assign(bins, 0.0);
  return h;
}

void check_shapes(const IndexMap& map, const FeatureMask& mask) {
  if (!map.meta.same_shape(mask.meta) || map.data.size() != mask.data.size()) {
    throw DimensionError("index map and mask differ in shape");
  }
}

// Half-sample reflection into [0, n).
std::size_t reflect(long long t, long long n) {
  while (t < 0 || t >= n) {
    t = t < 0 ? -t - 1 : 2 * n - t - 1;
  }
  return static_cast<std::size_t>(t);
}

}  // namespace

Histogram masked_histogram_serial(const IndexMap& map, const FeatureMask& mask,
                                  std::size_t bins) {
  check_shapes(map, mask);
  Histogram h = empty_histogram(bins);
  for (std::size_t i = 0; i < map.data.size(); ++i) {
    if (mask.data[i] != FeatureMask::kFeature || is_nodata(map.data[i])) {
      continue;
    }
    const std::size_t k = h.bin_of(map.data[i]);
    if (k < bins) {
      h.counts[k] += 1.0;
    }
  }
  if (h.total() == 0.0) {
    throw DomainError("no feature pixel of " + map.index_id + " holds a value in [-1, 1]");
  }
  return h;
}

Histogram masked_histogram(const IndexMap& map, const FeatureMask& mask, std::size_t bins) {
  check_shapes(map, mask);
  Histogram h = empty_histogram(bins);
  std::vector<std::uint64_t> merged(bins, 0);
  const auto n = static_cast<long long>(map.data.size());
  const float* values = map.data.data();
  const std::uint8_t* labels = mask.data.data();

#pragma omp parallel
  {
    std::vector<std::uint64_t> local(bins, 0);
#pragma omp for schedule(static) nowait
    for (long long i = 0; i < n; ++i) {
      if (labels[i] != FeatureMask::kFeature || is_nodata(values[i])) {
        continue;
      }
      const std::size_t k = h.bin_of(values[i]);
      if (k < bins) {
        ++local[k];
      }
    }
#pragma omp critical(msi_histogram_merge)
    for (std::size_t k = 0; k < bins; ++k) {
      merged[k] += local[k];
    }
  }
  std::uint64_t total = 0;
  for (std::size_t k = 0; k < bins; ++k) {
    h.counts[k] = static_cast<double>(merged[k]);
    total += merged[k];
  }
  if (total == 0) {
    throw DomainError("no feature pixel of " + map.index_id + " holds a value in [-1, 1]");
  }
  return h;
}

Histogram gaussian_smooth(const Histogram& h, double sigma_bins) {
  if (!(sigma_bins > 0.0)) {
    throw DomainError("Gaussian sigma must be positive");
  }
  const auto radius = static_cast<long long>(std::ceil(4.0 * sigma_bins));
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  double wsum = 0.0;
  for (long long d = -radius; d <= radius; ++d) {
    const double x = static_cast<double>(d) / sigma_bins;
    w[static_cast<std::size_t>(d + radius)] = std::exp(-0.5 * x * x);
    wsum += w[static_cast<std::size_t>(d + radius)];
  }
  for (double& x : w) {
    x /= wsum;
  }

  Histogram out = h;
  std::fill(out.counts.begin(), out.counts.end(), 0.0);
  const auto n = static_cast<long long>(h.counts.size());
  for (long long k = 0; k < n; ++k) {
    const double m = h.counts[static_cast<std::size_t>(k)];
    if (m == 0.0) {
      continue;
    }
    for (long long d = -radius; d <= radius; ++d) {
      out.counts[reflect(k + d, n)] += m * w[static_cast<std::size_t>(d + radius)];
    }
  }
  return out;
}

ThresholdRange select_peak_range(const Histogram& smoothed, double tau) {
  if (smoothed.counts.empty() || !(smoothed.total() > 0.0)) {
    throw DomainError("cannot select a range from an empty histogram");
  }
  const auto& c = smoothed.counts;
  const std::size_t peak =
      static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
  const double floor_level = tau * c[peak];
  std::size_t left = peak;
  std::size_t right = peak;
  while (left > 0 && c[left - 1] >= floor_level) {
    --left;
  }
  while (right + 1 < c.size() && c[right + 1] >= floor_level) {
    ++right;
  }
  return {smoothed.edge(left), smoothed.edge(right + 1)};
}

ThresholdRange select_exhaustive_range(const Histogram& smoothed, const IndexMap& map,
                                       const FeatureMask& truth) {
  check_shapes(map, truth);
  if (smoothed.counts.empty() || !(smoothed.total() > 0.0)) {
    throw DomainError("cannot select a range from an empty histogram");
  }
  const std::size_t bins = smoothed.bins();
  std::vector<double> edges(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) {
    edges[k] = smoothed.edge(k);
  }

  // A value v lies in [edge(i), edge(j)] iff i < L(v) and j >= U(v), with
  // U = #edges below v and L = #edges at or below v. Values off the edge
  // lattice (L == U) are tallied in `off`, values on an edge in `on`.
  const std::size_t slots = bins + 2;
  std::vector<std::uint64_t> off_pos(slots, 0), off_neg(slots, 0);
  std::vector<std::uint64_t> on_pos(slots, 0), on_neg(slots, 0);
  std::uint64_t total_pos = 0, total_neg = 0;
  for (std::size_t p = 0; p < map.data.size(); ++p) {
    const auto label = truth.data[p];
    if (label == FeatureMask::kIgnore || is_nodata(map.data[p])) {
      continue;
    }
    const double v = map.data[p];
    const auto u = static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), v) -
                                            edges.begin());
    const auto l = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), v) -
                                            edges.begin());
    const bool pos = label == FeatureMask::kFeature;
    (pos ? total_pos : total_neg) += 1;
    if (l == u) {
      (pos ? off_pos : off_neg)[u] += 1;
    } else {
      (pos ? on_pos : on_neg)[u] += 1;
    }
  }
  if (total_pos + total_neg == 0) {
    throw DomainError("no comparable pixel between " + map.index_id + " and truth");
  }

  auto prefix = [](const std::vector<std::uint64_t>& a) {
    std::vector<std::uint64_t> s(a.size() + 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      s[i + 1] = s[i] + a[i];
    }
    return s;
  };
  const auto P_off_pos = prefix(off_pos), P_off_neg = prefix(off_neg);
  const auto P_on_pos = prefix(on_pos), P_on_neg = prefix(on_neg);
  // Sum of a[lo..hi] inclusive via prefix sums.
  auto range_sum = [](const std::vector<std::uint64_t>& s, std::size_t lo, std::size_t hi) {
    return lo > hi ? std::uint64_t{0} : s[hi + 1] - s[lo];
  };

  struct Best {
    std::uint64_t correct = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    bool set = false;
  };
  auto better = [](const Best& a, const Best& b) {  // is a preferred over b
    if (!b.set) return a.set;
    if (!a.set) return false;
    if (a.correct != b.correct) return a.correct > b.correct;
    if (a.j - a.i != b.j - b.i) return a.j - a.i < b.j - b.i;
    return a.i < b.i;
  };

  std::vector<Best> per_lower(bins);
  const auto nb = static_cast<long long>(bins);
#pragma omp parallel for schedule(dynamic, 4)
  for (long long ii = 0; ii < nb; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    Best best;
    for (std::size_t j = i + 1; j <= bins; ++j) {
      const std::uint64_t tp = range_sum(P_off_pos, i + 1, j) + range_sum(P_on_pos, i, j);
      const std::uint64_t fp = range_sum(P_off_neg, i + 1, j) + range_sum(P_on_neg, i, j);
      const Best cand{tp + (total_neg - fp), i, j, true};
      if (better(cand, best)) {
        best = cand;
      }
    }
    per_lower[i] = best;
  }
  Best best;
  for (const auto& b : per_lower) {
    if (better(b, best)) {
      best = b;
    }
  }
  return {edges[best.i], edges[best.j]};
}

ThresholdRange select_range(const Histogram& smoothed, RangePolicy policy, const IndexMap& map,
                            const FeatureMask& truth, double tau) {
  switch (policy) {
    case RangePolicy::PeakExpansion:
      return select_peak_range(smoothed, tau);
    case RangePolicy::Exhaustive:
      return select_exhaustive_range(smoothed, map, truth);
  }
  throw DomainError("unknown range policy");
}

FeatureMask apply_threshold(const IndexMap& map, const ThresholdRange& range) {
  FeatureMask mask;
  mask.meta = map.meta;
  mask.data.resize(map.data.size());
  const auto n = static_cast<long long>(map.data.size());
  const float* values = map.data.data();
  std::uint8_t* out = mask.data.data();
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    const float v = values[i];
    if (is_nodata(v)) {
      out[i] = FeatureMask::kIgnore;
    } else {
      const double d = v;
      out[i] = (d >= range.lo && d <= range.hi) ? FeatureMask::kFeature : FeatureMask::kBackground;
    }
  }
  return mask;
}

ThresholdEvalResult evaluate_index(const IndexMap& map, const FeatureMask& truth,
                                   const ThresholdConfig& config,
                                   const std::string& feature_label) {
  check_shapes(map, truth);
  const Histogram hist = masked_histogram(map, truth, config.bins);
  const Histogram smooth = gaussian_smooth(hist, config.sigma_bins);
  const ThresholdRange range = select_range(smooth, config.policy, map, truth, config.tau);
  const ConfusionCounts counts = confusion(apply_threshold(map, range), truth);
  return {map.index_id, feature_label, range, counts, accuracy(counts)};
}

}  // namespace msi
