#include "msi/lai.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>

#include "msi/error.hpp"

namespace msi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct KindName {
  LaiKind kind;
  std::string_view id;
};

constexpr std::array<KindName, 10> kKinds = {{
    {LaiKind::CubicNdvi, "cubic-ndvi"},
    {LaiKind::LinearNdvi, "linear-ndvi"},
    {LaiKind::ExpNdvi, "exp-ndvi"},
    {LaiKind::Evi2A, "evi2-a"},
    {LaiKind::Evi2B, "evi2-b"},
    {LaiKind::Evi2C, "evi2-c"},
    {LaiKind::Evi2D, "evi2-d"},
    {LaiKind::SaviA, "savi-a"},
    {LaiKind::SaviB, "savi-b"},
    {LaiKind::Blend, "blend"},
}};

bool is_ndvi_model(LaiKind k) {
  return k == LaiKind::CubicNdvi || k == LaiKind::LinearNdvi || k == LaiKind::ExpNdvi;
}

std::optional<LaiKind> kind_from_id(std::string_view id) {
  for (const auto& k : kKinds) {
    if (k.id == id) {
      return k.kind;
    }
  }
  return std::nullopt;
}

// NaN marks a domain violation.
double single_model(LaiKind kind, double x) {
  switch (kind) {
    case LaiKind::CubicNdvi:
      return 9.519 * x * x * x - 0.1204 * x * x + 1.236 * x - 0.257;
    case LaiKind::LinearNdvi:
      return 4.9 * x - 0.46;
    case LaiKind::ExpNdvi:
      return 0.0287 * std::exp(5.081 * x);
    case LaiKind::Evi2A:
    case LaiKind::Evi2B: {
      if (x < 0.0) return kNaN;
      const double base = kind == LaiKind::Evi2A ? 2.92 * std::sqrt(x) - 0.43
                                                 : 3.126 * std::sqrt(x) - 0.58;
      return base * base;
    }
    case LaiKind::Evi2C: {
      if (x < 0.0) return kNaN;
      const double base = 5.3 * std::sqrt(x) - 1.66;
      return base >= 0.0 ? std::pow(base, 1.5) : kNaN;
    }
    case LaiKind::Evi2D: {
      if (x < 0.0) return kNaN;
      const double base = 5.47 * std::pow(x, 0.6) - 1.03;
      return base >= 0.0 ? std::pow(base, 4.0 / 3.0) : kNaN;
    }
    case LaiKind::SaviA:
      return 11.0 * x * x * x;
    case LaiKind::SaviB: {
      const double arg = (0.69 - x) / 0.59;
      return arg > 0.0 ? -std::log(arg) / 0.91 : kNaN;
    }
    case LaiKind::Blend:
      break;
  }
  return kNaN;
}

double estimate_or_nan(const LaiModelSpec& m, double ndvi, double evi2, double savi,
                       double idvi) {
  switch (m.kind) {
    case LaiKind::CubicNdvi:
    case LaiKind::LinearNdvi:
    case LaiKind::ExpNdvi:
      return single_model(m.kind, ndvi);
    case LaiKind::Evi2A:
    case LaiKind::Evi2B:
    case LaiKind::Evi2C:
    case LaiKind::Evi2D:
      return single_model(m.kind, evi2);
    case LaiKind::SaviA:
    case LaiKind::SaviB:
      return single_model(m.kind, savi);
    case LaiKind::Blend: {
      const double alpha = blend_alpha(ndvi, m.k);
      const double lai_ndvi = single_model(m.ndvi_model, ndvi);
      const double lai_idvi = m.idvi_a * idvi + m.idvi_b;
      return (1.0 - alpha) * lai_ndvi + alpha * lai_idvi;
    }
  }
  return kNaN;
}

double parse_number(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::string_view LaiModelSpec::base_index() const noexcept {
  switch (kind) {
    case LaiKind::Evi2A:
    case LaiKind::Evi2B:
    case LaiKind::Evi2C:
    case LaiKind::Evi2D:
      return "EVI2";
    case LaiKind::SaviA:
    case LaiKind::SaviB:
      return "SAVI";
    default:
      return "NDVI";
  }
}

void LaiModelSpec::validate() const {
  if (kind != LaiKind::Blend) {
    return;
  }
  if (!(k >= 12.0 && k <= 20.0)) {
    throw DomainError("blend steepness k must lie in [12, 20]");
  }
  if (!is_ndvi_model(ndvi_model)) {
    throw DomainError("blend NDVI sub-model must be an NDVI-based model");
  }
}

std::vector<LaiModelSpec> lai_models() {
  std::vector<LaiModelSpec> out;
  for (const auto& k : kKinds) {
    LaiModelSpec m;
    m.id = std::string(k.id);
    m.kind = k.kind;
    out.push_back(m);
  }
  return out;
}

LaiModelSpec lai_model(std::string_view id) {
  if (auto k = kind_from_id(id)) {
    LaiModelSpec m;
    m.id = std::string(id);
    m.kind = *k;
    return m;
  }
  throw Error("unknown LAI model '" + std::string(id) + "'");
}

void apply_lai_override(LaiModelSpec& model, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw FormatError("LAI parameter must look like name=value");
  }
  const auto key = assignment.substr(0, eq);
  const auto value = assignment.substr(eq + 1);
  if (key == "k") {
    model.k = parse_number(value);
  } else if (key == "idvi_a") {
    model.idvi_a = parse_number(value);
  } else if (key == "idvi_b") {
    model.idvi_b = parse_number(value);
  } else if (key == "ndvi_model") {
    const auto k = kind_from_id(value);
    if (!k) {
      throw FormatError("unknown LAI model '" + std::string(value) + "'");
    }
    model.ndvi_model = *k;
  } else {
    throw FormatError("unknown LAI parameter '" + std::string(key) + "'");
  }
  model.validate();
}

double blend_alpha(double ndvi, double k) { return 1.0 / (1.0 + std::exp(-k * (ndvi - 0.8))); }

double lai_estimate(const LaiModelSpec& model, const LaiInputs& in) {
  model.validate();
  auto need = [&](const std::optional<double>& v, const char* name) {
    if (!v) {
      throw ContextError(model.id + " needs a " + name + " value");
    }
    return *v;
  };
  double ndvi = kNaN, evi2 = kNaN, savi = kNaN, idvi = kNaN;
  const auto base = model.base_index();
  if (base == "EVI2") {
    evi2 = need(in.evi2, "EVI2");
  } else if (base == "SAVI") {
    savi = need(in.savi, "SAVI");
  } else {
    ndvi = need(in.ndvi, "NDVI");
  }
  if (model.kind == LaiKind::Blend) {
    idvi = need(in.idvi, "IDVI");
  }
  const double v = estimate_or_nan(model, ndvi, evi2, savi, idvi);
  if (!std::isfinite(v)) {
    throw DomainError(model.id + " is undefined at this input");
  }
  return v;
}

IndexMap lai_map(const LaiModelSpec& model, const BandStack& stack, const IndexCatalog& catalog) {
  model.validate();
  const ImageContext no_context;
  const IndexMap base = compute_map(catalog.at(model.base_index()), stack, no_context);
  std::optional<IndexMap> idvi;
  if (model.kind == LaiKind::Blend) {
    idvi = compute_map(catalog.at("IDVI"), stack, no_context);
  }

  IndexMap out;
  out.meta = stack.meta();
  out.index_id = "LAI:" + model.id;
  out.data.assign(base.data.size(), kNodata);
  const auto n = static_cast<long long>(base.data.size());
  const std::string_view base_id = model.base_index();
  std::size_t singular = 0;
#pragma omp parallel for schedule(static) reduction(+ : singular)
  for (long long i = 0; i < n; ++i) {
    const double x = base.data[static_cast<std::size_t>(i)];
    const double y = idvi ? idvi->data[static_cast<std::size_t>(i)] : 0.0;
    if (std::isnan(x) || std::isnan(y)) {
      continue;
    }
    double ndvi = kNaN, evi2 = kNaN, savi = kNaN;
    (base_id == "EVI2" ? evi2 : base_id == "SAVI" ? savi : ndvi) = x;
    const double v = estimate_or_nan(model, ndvi, evi2, savi, y);
    if (std::isfinite(v)) {
      out.data[static_cast<std::size_t>(i)] = static_cast<float>(v);
    } else {
      ++singular;
    }
  }
  out.singular_count = singular;
  return out;
}

}  // namespace msi
