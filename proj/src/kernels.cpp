#include <algorithm>
#include <cmath>
#include <limits>

#include "msi/error.hpp"
#include "msi/indices.hpp"

namespace msi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool needs_m_red(const IndexSpec& s) { return s.formula == Formula::TAVI; }
bool needs_components(const IndexSpec& s) { return s.formula == Formula::ASI; }
bool needs_updm(const IndexSpec& s) { return s.formula == Formula::VIUPD; }
bool needs_muwi(const IndexSpec& s) { return s.formula == Formula::MUWI; }

void check_context(const IndexSpec& spec, const ImageContext& ctx) {
  if (needs_m_red(spec) && !ctx.m_red) {
    throw ContextError(spec.id + " needs M_RED in the image context");
  }
  if (needs_components(spec)) {
    for (auto c : kAsiComponents) {
      if (!ctx.component(c)) {
        throw ContextError(spec.id + " needs the image-wide range of " +
                           std::string(to_string(c)));
      }
    }
  }
  if (needs_muwi(spec) && !ctx.muwi) {
    throw ContextError(spec.id + " needs MuWi coefficients");
  }
}

struct Inputs {
  std::vector<std::pair<SpectralRole, const float*>> bands;
  const UpdmGrids* updm = nullptr;
};

Inputs gather_inputs(const IndexSpec& spec, const BandStack& stack, const ImageContext& ctx) {
  check_computable(spec, stack, ctx);
  Inputs in;
  for (auto role : spec.required_roles) {
    in.bands.emplace_back(role, stack.band(role).data.data());
  }
  if (needs_updm(spec)) {
    in.updm = &*ctx.updm;
  }
  return in;
}

// Evaluates pixels [begin, end) into out. Returns the singular count.
std::size_t eval_range(const IndexSpec& spec, const Inputs& in, const ImageContext& ctx,
                       std::size_t begin, std::size_t end, float* out) {
  std::array<double, kRoleCount> rho;
  rho.fill(kNaN);
  std::size_t singular = 0;
  for (std::size_t i = begin; i < end; ++i) {
    bool valid = true;
    for (const auto& [role, data] : in.bands) {
      const float v = data[i];
      valid = valid && !is_nodata(v);
      rho[role_index(role)] = v;
    }
    UpdmSample u;
    if (in.updm != nullptr) {
      u = {in.updm->vegetation[i], in.updm->soil[i], in.updm->water[i], in.updm->yellow[i]};
      valid = valid && !std::isnan(u.vegetation) && !std::isnan(u.soil) &&
              !std::isnan(u.water) && !std::isnan(u.yellow);
    }
    if (!valid) {
      out[i] = kNodata;
      continue;
    }
    const double v = detail::evaluate(spec, rho, in.updm ? &u : nullptr, ctx);
    if (!std::isfinite(v)) {
      out[i] = kNodata;
      ++singular;
    } else {
      out[i] = static_cast<float>(v);
    }
  }
  return singular;
}

IndexMap empty_map(const IndexSpec& spec, const GridMeta& meta) {
  IndexMap map;
  map.meta = meta;
  map.index_id = spec.id;
  map.data.assign(meta.pixel_count(), kNodata);
  return map;
}

}  // namespace

void check_computable(const IndexSpec& spec, const BandStack& stack, const ImageContext& ctx) {
  for (auto role : spec.required_roles) {
    if (!stack.has(role)) {
      throw RoleError(spec.id + " needs a " + std::string(to_string(role)) + " band");
    }
  }
  check_context(spec, ctx);
  if (needs_updm(spec)) {
    if (!ctx.updm) {
      throw ContextError(spec.id + " needs UPDM coefficient grids");
    }
    const auto n = stack.meta().pixel_count();
    const auto& u = *ctx.updm;
    if (u.vegetation.size() != n || u.soil.size() != n || u.water.size() != n ||
        u.yellow.size() != n) {
      throw DimensionError("UPDM coefficient grids do not match the stack dimensions");
    }
  }
  if (needs_muwi(spec)) {
    for (const auto& [role, a] : ctx.muwi->weights) {
      if (!stack.has(role)) {
        throw RoleError(spec.id + " weights a missing " + std::string(to_string(role)) +
                        " band");
      }
    }
  }
}

double compute_pixel(const IndexSpec& spec, const PixelSample& sample, const ImageContext& ctx) {
  for (auto role : spec.required_roles) {
    if (!sample.has(role)) {
      throw RoleError(spec.id + " needs a " + std::string(to_string(role)) + " value");
    }
  }
  check_context(spec, ctx);
  if (needs_updm(spec) && !sample.updm) {
    throw ContextError(spec.id + " needs UPDM coefficients");
  }
  for (auto role : spec.required_roles) {
    if (std::isnan(sample.get(role))) {
      return kNaN;
    }
  }
  const double v = detail::evaluate(spec, sample.values(),
                                    sample.updm ? &*sample.updm : nullptr, ctx);
  return std::isfinite(v) ? v : kNaN;
}

IndexMap compute_map(const IndexSpec& spec, const BandStack& stack, const ImageContext& ctx,
                     std::size_t tile_rows) {
  const Inputs in = gather_inputs(spec, stack, ctx);
  IndexMap map = empty_map(spec, stack.meta());
  const std::size_t width = stack.meta().width;
  const std::size_t height = stack.meta().height;
  tile_rows = std::max<std::size_t>(tile_rows, 1);
  const auto tiles = static_cast<long long>((height + tile_rows - 1) / tile_rows);
  float* out = map.data.data();
  std::size_t singular = 0;

#pragma omp parallel for schedule(static) reduction(+ : singular)
  for (long long t = 0; t < tiles; ++t) {
    const std::size_t row0 = static_cast<std::size_t>(t) * tile_rows;
    const std::size_t row1 = std::min(height, row0 + tile_rows);
    singular += eval_range(spec, in, ctx, row0 * width, row1 * width, out);
  }
  map.singular_count = singular;
  return map;
}

IndexMap compute_map_serial(const IndexSpec& spec, const BandStack& stack,
                            const ImageContext& ctx) {
  check_computable(spec, stack, ctx);
  IndexMap map = empty_map(spec, stack.meta());
  for (std::size_t i = 0; i < map.data.size(); ++i) {
    PixelSample s;
    for (auto role : spec.required_roles) {
      s.set(role, stack.band(role).data[i]);
    }
    if (needs_updm(spec)) {
      const auto& u = *ctx.updm;
      s.updm = UpdmSample{u.vegetation[i], u.soil[i], u.water[i], u.yellow[i]};
      if (std::isnan(s.updm->vegetation) || std::isnan(s.updm->soil) ||
          std::isnan(s.updm->water) || std::isnan(s.updm->yellow)) {
        continue;
      }
    }
    bool valid = true;
    for (auto role : spec.required_roles) {
      valid = valid && !std::isnan(s.get(role));
    }
    if (!valid) {
      continue;
    }
    const double v = compute_pixel(spec, s, ctx);
    if (std::isnan(v)) {
      ++map.singular_count;
    } else {
      map.data[i] = static_cast<float>(v);
    }
  }
  return map;
}

ImageContext build_context(const BandStack& stack, const IndexCatalog& catalog) {
  ImageContext ctx;
  if (const Band* red = stack.find(SpectralRole::Red)) {
    const float* data = red->data.data();
    const auto n = static_cast<long long>(red->data.size());
    double m = -std::numeric_limits<double>::infinity();
    long long valid = 0;
#pragma omp parallel for reduction(max : m) reduction(+ : valid)
    for (long long i = 0; i < n; ++i) {
      if (!is_nodata(data[i])) {
        m = std::max(m, static_cast<double>(data[i]));
        ++valid;
      }
    }
    if (valid == 0) {
      throw DomainError("RED band holds no valid pixel");
    }
    ctx.m_red = m;
  }

  for (auto c : kAsiComponents) {
    const IndexSpec& spec = catalog.at(to_string(c));
    const bool supported = std::all_of(spec.required_roles.begin(), spec.required_roles.end(),
                                       [&](SpectralRole r) { return stack.has(r); });
    if (!supported) {
      continue;
    }
    const IndexMap map = compute_map(spec, stack, ctx);
    const float* data = map.data.data();
    const auto n = static_cast<long long>(map.data.size());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
#pragma omp parallel for reduction(min : lo) reduction(max : hi)
    for (long long i = 0; i < n; ++i) {
      if (!is_nodata(data[i])) {
        lo = std::min(lo, static_cast<double>(data[i]));
        hi = std::max(hi, static_cast<double>(data[i]));
      }
    }
    if (lo <= hi) {
      ctx.component_minmax[static_cast<std::size_t>(c)] = MinMax{lo, hi};
    }
  }
  return ctx;
}

IndexMap normalize_map(const IndexMap& map) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (float v : map.data) {
    if (!is_nodata(v)) {
      lo = std::min<double>(lo, v);
      hi = std::max<double>(hi, v);
    }
  }
  if (!(lo <= hi)) {
    throw DomainError("cannot normalize " + map.index_id + ": no valid pixel");
  }
  if (lo == hi) {
    throw DomainError("cannot normalize " + map.index_id + ": all valid values are equal");
  }
  IndexMap out = map;
  const double span = hi - lo;
  const auto n = static_cast<long long>(out.data.size());
  float* data = out.data.data();
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    const float v = data[i];
    if (!is_nodata(v)) {
      const double t = 2.0 * ((v - lo) / span) - 1.0;
      data[i] = static_cast<float>(std::clamp(t, -1.0, 1.0));
    }
  }
  out.normalized = true;
  return out;
}

}  // namespace msi
