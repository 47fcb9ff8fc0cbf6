#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "msi/indices.hpp"
#include "msi/raster.hpp"

namespace msi {

/// Empirical LAI model families.
enum class LaiKind {
  CubicNdvi,   // 9.519 NDVI^3 - 0.1204 NDVI^2 + 1.236 NDVI - 0.257
  LinearNdvi,  // 4.9 NDVI - 0.46
  ExpNdvi,     // 0.0287 exp(5.081 NDVI)
  Evi2A,       // (2.92 sqrt(EVI2) - 0.43)^2
  Evi2B,       // (3.126 sqrt(EVI2) - 0.58)^2
  Evi2C,       // (5.3 sqrt(EVI2) - 1.66)^(3/2)
  Evi2D,       // (5.47 EVI2^(3/5) - 1.03)^(4/3)
  SaviA,       // 11 SAVI^3
  SaviB,       // -ln((0.69 - SAVI) / 0.59) / 0.91
  Blend,       // (1 - alpha) LAI_NDVI + alpha LAI_IDVI
};

struct LaiModelSpec {
  std::string id;
  LaiKind kind = LaiKind::CubicNdvi;
  /// Blend only: k (default 16, allowed [12, 20]), idvi_a, idvi_b for the
  /// IDVI sub-model a * IDVI + b.
  double k = 16.0;
  double idvi_a = 1.0;
  double idvi_b = 0.0;
  /// Blend only: the NDVI sub-model.
  LaiKind ndvi_model = LaiKind::CubicNdvi;

  /// Catalog id of the index the model consumes (NDVI for the blend).
  std::string_view base_index() const noexcept;
  /// Throws DomainError when k lies outside [12, 20] or the NDVI
  /// sub-model is not NDVI-based.
  void validate() const;
};

/// Model ids: cubic-ndvi, linear-ndvi, exp-ndvi, evi2-a, evi2-b, evi2-c,
/// evi2-d, savi-a, savi-b, blend.
std::vector<LaiModelSpec> lai_models();
/// Throws Error for an unknown id.
LaiModelSpec lai_model(std::string_view id);
/// `k=14`, `idvi_a=...`, `idvi_b=...`, `ndvi_model=linear-ndvi`.
void apply_lai_override(LaiModelSpec& model, std::string_view assignment);

struct LaiInputs {
  std::optional<double> ndvi;
  std::optional<double> evi2;
  std::optional<double> savi;
  std::optional<double> idvi;
};

/// Sigmoid weight 1 / (1 + exp(-k (NDVI - 0.8))).
double blend_alpha(double ndvi, double k);

/// Throws DomainError when the formula is undefined at the input (negative
/// square-root or fractional-power base, non-positive logarithm argument)
/// and ContextError when a needed index value is missing.
double lai_estimate(const LaiModelSpec& model, const LaiInputs& inputs);

/// Pixelwise lai_estimate over index maps computed from the stack. Domain
/// violations become nodata.
IndexMap lai_map(const LaiModelSpec& model, const BandStack& stack, const IndexCatalog& catalog);

}  // namespace msi
