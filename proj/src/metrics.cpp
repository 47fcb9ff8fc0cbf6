#include "msi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "msi/error.hpp"

namespace msi {

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // n - 1 divisor
};

Moments moments(const ClassSample& s) {
  if (s.values.size() < 2) {
    throw DomainError("sample '" + s.label + "' needs at least two values");
  }
  for (double v : s.values) {
    if (!std::isfinite(v)) {
      throw DomainError("sample '" + s.label + "' holds a non-finite value");
    }
  }
  const double n = static_cast<double>(s.values.size());
  const double mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : s.values) {
    ss += (v - mean) * (v - mean);
  }
  return {mean, ss / (n - 1.0)};
}

Moments positive_moments(const ClassSample& s) {
  const Moments m = moments(s);
  if (!(m.var > 0.0)) {
    throw DomainError("sample '" + s.label + "' has zero variance");
  }
  return m;
}

void check_pair(std::span<const double> pred, std::span<const double> obs) {
  if (pred.size() != obs.size()) {
    throw DimensionError("prediction and observation lengths differ");
  }
  if (pred.size() < 2) {
    throw DomainError("need at least two observations");
  }
}

}  // namespace

ConfusionCounts confusion(const FeatureMask& pred, const FeatureMask& truth) {
  if (!pred.meta.same_shape(truth.meta) || pred.data.size() != truth.data.size()) {
    throw DimensionError("prediction and truth masks differ in shape");
  }
  const auto n = static_cast<long long>(pred.data.size());
  const std::uint8_t* p = pred.data.data();
  const std::uint8_t* t = truth.data.data();
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
#pragma omp parallel for schedule(static) reduction(+ : tp, tn, fp, fn)
  for (long long i = 0; i < n; ++i) {
    const auto a = p[i];
    const auto b = t[i];
    if (a == FeatureMask::kIgnore || b == FeatureMask::kIgnore) {
      continue;
    }
    if (a == FeatureMask::kFeature) {
      (b == FeatureMask::kFeature ? tp : fp) += 1;
    } else {
      (b == FeatureMask::kFeature ? fn : tn) += 1;
    }
  }
  ConfusionCounts c{tp, tn, fp, fn};
  if (c.total() == 0) {
    throw DomainError("no comparable pixels between prediction and truth");
  }
  return c;
}

double accuracy(const ConfusionCounts& c) {
  if (c.total() == 0) {
    throw DomainError("accuracy of an empty confusion table");
  }
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double sensitivity(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0) {
    throw DomainError("sensitivity is undefined without positive pixels");
  }
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

double rmse(std::span<const double> pred, std::span<const double> obs) {
  check_pair(pred, obs);
  double ss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ss += (pred[i] - obs[i]) * (pred[i] - obs[i]);
  }
  return std::sqrt(ss / static_cast<double>(pred.size()));
}

double r2(std::span<const double> pred, std::span<const double> obs) {
  check_pair(pred, obs);
  const double mean = std::accumulate(obs.begin(), obs.end(), 0.0) / static_cast<double>(obs.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    ss_res += (obs[i] - pred[i]) * (obs[i] - pred[i]);
    ss_tot += (obs[i] - mean) * (obs[i] - mean);
  }
  if (!(ss_tot > 0.0)) {
    throw DomainError("r2 is undefined for constant observations");
  }
  return 1.0 - ss_res / ss_tot;
}

double miou(std::span<const ConfusionCounts> per_class) {
  double sum = 0.0;
  std::size_t used = 0;
  for (const auto& c : per_class) {
    const auto uni = c.tp + c.fp + c.fn;
    if (uni == 0) {
      continue;
    }
    sum += static_cast<double>(c.tp) / static_cast<double>(uni);
    ++used;
  }
  if (used == 0) {
    throw DomainError("miou needs at least one class with a non-empty union");
  }
  return sum / static_cast<double>(used);
}

double bhattacharyya(const ClassSample& a, const ClassSample& b) {
  const Moments ma = positive_moments(a);
  const Moments mb = positive_moments(b);
  const double sum_var = ma.var + mb.var;
  const double d = ma.mean - mb.mean;
  return 0.25 * d * d / sum_var + 0.5 * std::log(sum_var / (2.0 * std::sqrt(ma.var * mb.var)));
}

double jmd(const ClassSample& a, const ClassSample& b) {
  const double bd = std::max(0.0, bhattacharyya(a, b));
  return std::sqrt(2.0 * (1.0 - std::exp(-bd)));
}

double divergence(const ClassSample& a, const ClassSample& b) {
  const Moments ma = positive_moments(a);
  const Moments mb = positive_moments(b);
  const double d = ma.mean - mb.mean;
  return 0.5 * (ma.var - mb.var) * (1.0 / mb.var - 1.0 / ma.var) +
         0.5 * (1.0 / ma.var + 1.0 / mb.var) * d * d;
}

double td(const ClassSample& a, const ClassSample& b) {
  const double dv = std::max(0.0, divergence(a, b));
  return 2.0 * (1.0 - std::exp(-dv / 8.0));
}

double sdi(const ClassSample& a, const ClassSample& b) {
  const Moments ma = positive_moments(a);
  const Moments mb = positive_moments(b);
  return std::abs(ma.mean - mb.mean) / (std::sqrt(ma.var) + std::sqrt(mb.var));
}

std::string_view to_string(StatisticKind kind) noexcept {
  switch (kind) {
    case StatisticKind::T: return "t";
    case StatisticKind::F: return "F";
    case StatisticKind::U: return "U";
    case StatisticKind::H: return "H";
    case StatisticKind::Chi2: return "chi2";
  }
  return "?";
}

TestResult t_test(const ClassSample& a, const ClassSample& b) {
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double na = static_cast<double>(a.values.size());
  const double nb = static_cast<double>(b.values.size());
  const double df = na + nb - 2.0;
  const double pooled = ((na - 1.0) * ma.var + (nb - 1.0) * mb.var) / df;
  if (!(pooled > 0.0)) {
    throw DomainError("t test is undefined when both samples are constant");
  }
  const double t = (ma.mean - mb.mean) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  return {t, dist::student_t_two_sided(t, df), StatisticKind::T};
}

TestResult anova(std::span<const ClassSample> groups) {
  if (groups.size() < 2) {
    throw DomainError("ANOVA needs at least two groups");
  }
  double total = 0.0;
  std::size_t n = 0;
  std::vector<Moments> m;
  for (const auto& g : groups) {
    m.push_back(moments(g));
    total += m.back().mean * static_cast<double>(g.values.size());
    n += g.values.size();
  }
  const double grand = total / static_cast<double>(n);
  double ssb = 0.0;
  double ssw = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const double ni = static_cast<double>(groups[i].values.size());
    ssb += ni * (m[i].mean - grand) * (m[i].mean - grand);
    ssw += (ni - 1.0) * m[i].var;
  }
  if (!(ssw > 0.0)) {
    throw DomainError("ANOVA is undefined with zero within-group variance");
  }
  const double df1 = static_cast<double>(groups.size() - 1);
  const double df2 = static_cast<double>(n - groups.size());
  const double f = (ssb / df1) / (ssw / df2);
  return {f, dist::f_upper(f, df1, df2), StatisticKind::F};
}

TestResult mcnemar(std::uint64_t b, std::uint64_t c, bool continuity_correction) {
  if (b + c == 0) {
    throw DomainError("McNemar test needs at least one discordant pair");
  }
  const double diff = std::abs(static_cast<double>(b) - static_cast<double>(c));
  const double num = continuity_correction ? std::max(0.0, diff - 1.0) : diff;
  const double chi2 = num * num / static_cast<double>(b + c);
  return {chi2, dist::chi2_upper(chi2, 1.0), StatisticKind::Chi2};
}

}  // namespace msi
