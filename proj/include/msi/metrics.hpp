#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msi/raster.hpp"

namespace msi {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Pixel-by-pixel comparison; pixels marked ignore in either mask are
/// skipped. Throws DimensionError on shape mismatch and DomainError when no
/// pixel is comparable.
ConfusionCounts confusion(const FeatureMask& pred, const FeatureMask& truth);

/// (tp + tn) / total, as a fraction.
double accuracy(const ConfusionCounts& c);
/// tp / (tp + fn). Throws DomainError without positives.
double sensitivity(const ConfusionCounts& c);

double rmse(std::span<const double> pred, std::span<const double> obs);
/// 1 - SS_res / SS_tot. Throws DomainError for constant observations.
double r2(std::span<const double> pred, std::span<const double> obs);
/// Mean of tp / (tp + fp + fn) over classes with a non-empty union.
double miou(std::span<const ConfusionCounts> per_class);

struct ClassSample {
  std::vector<double> values;
  std::string label;
};

// Separability under a single-variate Gaussian fit of each sample
// (mean, n-1 standard deviation).

/// Bhattacharyya distance between the two fitted Gaussians.
double bhattacharyya(const ClassSample& a, const ClassSample& b);
/// sqrt(2 (1 - exp(-B))), in [0, sqrt 2].
double jmd(const ClassSample& a, const ClassSample& b);
/// Divergence of the two fitted Gaussians.
double divergence(const ClassSample& a, const ClassSample& b);
/// 2 (1 - exp(-D / 8)), in [0, 2].
double td(const ClassSample& a, const ClassSample& b);
/// |mu_a - mu_b| / (sigma_a + sigma_b), in [0, inf).
double sdi(const ClassSample& a, const ClassSample& b);

enum class StatisticKind { T, F, U, H, Chi2 };
std::string_view to_string(StatisticKind kind) noexcept;

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  StatisticKind kind = StatisticKind::T;
};

/// Pooled-variance Student t test, two-sided.
TestResult t_test(const ClassSample& a, const ClassSample& b);
/// One-way ANOVA, upper-tail F.
TestResult anova(std::span<const ClassSample> groups);

/// Largest combined size for which the Mann-Whitney p-value is exact.
inline constexpr std::size_t kMwuExactLimit = 20;
/// U = min(U_a, U_b) with a two-sided p: exact permutation distribution up
/// to kMwuExactLimit observations, tie-corrected normal approximation above.
TestResult mann_whitney_u(const ClassSample& a, const ClassSample& b);
/// Tie-corrected H with an upper-tail chi-square p on k-1 degrees of freedom.
TestResult kruskal_wallis(std::span<const ClassSample> groups);
/// (b - c)^2 / (b + c), or (|b - c| - 1)^2 / (b + c) with continuity
/// correction; upper-tail chi-square p on one degree of freedom.
TestResult mcnemar(std::uint64_t b, std::uint64_t c, bool continuity_correction = false);

namespace dist {
double normal_cdf(double z);
/// P(|T| >= |t|) for Student t with df degrees of freedom.
double student_t_two_sided(double t, double df);
double chi2_upper(double x, double df);
double f_upper(double x, double df1, double df2);
}  // namespace dist

}  // namespace msi
