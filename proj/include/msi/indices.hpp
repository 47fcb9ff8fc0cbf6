#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msi/raster.hpp"

namespace msi {

enum class IndexGroup : std::uint8_t {
  I, II, III, IV, V, VI, VII, VIII, IX, X, XI, XII, Supplementary,
};

std::string_view to_string(IndexGroup group) noexcept;

/// One evaluator per catalog entry.
enum class Formula : std::uint8_t {
  SR, NDVI, DVI, RDVI, MSR, GNDVI, GARI, NDRE, GDVI, GRVI, IDVI,
  ARI, MARI,
  EVI, EVI2,
  SAVI, MSAVI, OSAVI,
  MBI, EMBI,
  TAVI,
  NDHD, NHVI2, HSVI, HEVI2,
  VIUPD,
  NDWI, NDMI, MNDWI,
  NBR, BAI, NBRT1,
  ASI, ASI_ALT, AF, VSF, SSF, MF,
  REI, RI,
  UI, NDBI, IBI, BCI, VGNIR_BI, PISI, BLFEI, MUWI,
};

/// Which physical band stands in for the formulas' unadorned SWIR symbols.
struct RoleAliases {
  SpectralRole swir = SpectralRole::Swir1;       // NDMI, NBR, NBRT1, RI
  SpectralRole swir_long = SpectralRole::Swir1;  // MNDWI's SWIR_L, and EMBI/SSF/IBI through it
};

struct IndexParam {
  std::string name;
  double value = 0.0;
};

struct IndexSpec {
  std::string id;
  IndexGroup group = IndexGroup::I;
  Formula formula = Formula::SR;
  std::vector<SpectralRole> required_roles;  // canonical role order, no duplicates
  bool needs_context = false;
  std::vector<IndexParam> params;  // positional, see formulas.cpp
  RoleAliases aliases;

  /// Throws std::out_of_range for an unknown parameter name.
  double param(std::string_view name) const;
  void set_param(std::string_view name, double value);
  bool has_param(std::string_view name) const noexcept;
};

class IndexCatalog {
public:
  /// Every index of the grouped table and the supplementary table.
  static IndexCatalog standard(RoleAliases aliases = {});

  std::span<const IndexSpec> entries() const noexcept { return entries_; }
  const IndexSpec* find(std::string_view id) const noexcept;
  /// Throws Error for an unknown id.
  const IndexSpec& at(std::string_view id) const;

  /// `name=value` applies to every index that has the parameter;
  /// `ID.name=value` targets one index. Returns how many specs changed.
  std::size_t apply_override(std::string_view assignment);
  void set_param(std::string_view id, std::string_view name, double value);

private:
  std::vector<IndexSpec> entries_;
};

/// The exact minimal role set of an index; composites report the union of
/// their factors.
std::vector<SpectralRole> required_bands(const IndexSpec& spec);

struct MinMax {
  double min = 0.0;
  double max = 0.0;
};

/// The four ASI components, in formula order.
enum class AsiComponent : std::uint8_t { AF, VSF, SSF, MF };
inline constexpr std::array<AsiComponent, 4> kAsiComponents = {
    AsiComponent::AF, AsiComponent::VSF, AsiComponent::SSF, AsiComponent::MF};
std::string_view to_string(AsiComponent c) noexcept;

/// Per-pixel UPDM coefficient grids. The yellow coefficient is the one the
/// grouped table prints as C_4 and its legend names C_Y.
struct UpdmGrids {
  std::vector<float> vegetation;  // C_V
  std::vector<float> soil;        // C_S
  std::vector<float> water;       // C_W
  std::vector<float> yellow;      // C_4 / C_Y
};

struct UpdmSample {
  double vegetation = 0.0;
  double soil = 0.0;
  double water = 0.0;
  double yellow = 0.0;
};

/// MuWi linear form sum(a_i * rho_i) - b.
struct MuwiCoefficients {
  std::vector<std::pair<SpectralRole, double>> weights;
  double offset = 0.0;
};

struct ImageContext {
  std::optional<double> m_red;
  std::array<std::optional<MinMax>, 4> component_minmax;
  std::optional<UpdmGrids> updm;
  std::optional<MuwiCoefficients> muwi;

  const std::optional<MinMax>& component(AsiComponent c) const noexcept {
    return component_minmax[static_cast<std::size_t>(c)];
  }
};

/// Builds UPDM grids from a container whose layers are named C_V, C_S, C_W
/// and C_4 (C_Y accepted as a synonym).
UpdmGrids updm_from_grids(const GridSet& grids, const GridMeta& expected);
/// `{"weights": {"BLUE": a, ...}, "offset": b}`
MuwiCoefficients parse_muwi(std::string_view json_text);

/// Band values at one pixel, with presence tracked separately from nodata.
class PixelSample {
public:
  PixelSample() { values_.fill(std::numeric_limits<double>::quiet_NaN()); }

  PixelSample& set(SpectralRole role, double value) {
    values_[role_index(role)] = value;
    present_.set(role_index(role));
    return *this;
  }
  bool has(SpectralRole role) const noexcept { return present_.test(role_index(role)); }
  double get(SpectralRole role) const noexcept { return values_[role_index(role)]; }
  const std::array<double, kRoleCount>& values() const noexcept { return values_; }

  std::optional<UpdmSample> updm;

private:
  std::array<double, kRoleCount> values_;
  std::bitset<kRoleCount> present_;
};

/// Denominators smaller than this in magnitude yield nodata.
inline constexpr double kSingularEps = 1e-12;

/// Image-level statistics: M_RED over valid RED pixels and the min/max of
/// every ASI component the stack supports. Throws DomainError when the RED
/// band holds no valid pixel.
ImageContext build_context(const BandStack& stack, const IndexCatalog& catalog);

/// The formula value for one pixel, NaN for nodata inputs or a singular
/// denominator. Throws RoleError / ContextError for absent inputs.
double compute_pixel(const IndexSpec& spec, const PixelSample& sample, const ImageContext& ctx);

/// Throws RoleError / ContextError if the stack or context cannot support
/// the index.
void check_computable(const IndexSpec& spec, const BandStack& stack, const ImageContext& ctx);

/// Tile-parallel map evaluation. Output is bit-identical for every
/// tile_rows value and thread count.
IndexMap compute_map(const IndexSpec& spec, const BandStack& stack, const ImageContext& ctx,
                     std::size_t tile_rows = 64);

/// Single-threaded row-major reference for compute_map.
IndexMap compute_map_serial(const IndexSpec& spec, const BandStack& stack,
                            const ImageContext& ctx);

/// Affine rescale of valid values onto [-1, 1]. Throws DomainError when no
/// value is valid or all valid values are equal.
IndexMap normalize_map(const IndexMap& map);

namespace detail {
// Shared evaluator. `rho` is indexed by role_index; `updm` may be null for
// indices other than VIUPD.
double evaluate(const IndexSpec& spec, const std::array<double, kRoleCount>& rho,
                const UpdmSample* updm, const ImageContext& ctx);
}  // namespace detail

}  // namespace msi
