#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace msi {

/// Grid geometry shared by every raster layer of a scene.
struct GridMeta {
  std::size_t width = 0;
  std::size_t height = 0;
  std::optional<double> pixel_size;  // ground units per pixel, informational
  std::string crs_label;

  std::size_t pixel_count() const noexcept { return width * height; }
  bool same_shape(const GridMeta& other) const noexcept {
    return width == other.width && height == other.height;
  }
  void validate() const;
};

enum class SpectralRole : std::uint8_t {
  Blue,
  Green,
  Red,
  RedEdge,
  Nir,
  Swir1,
  Swir2,
  Thermal,
  Hotspot,
  Darkspot,
  TcH,
  TcV,
  TcL,
  Aux,
};

inline constexpr std::size_t kRoleCount = 14;

inline constexpr std::array<SpectralRole, kRoleCount> kAllRoles = {
    SpectralRole::Blue,    SpectralRole::Green,   SpectralRole::Red,
    SpectralRole::RedEdge, SpectralRole::Nir,     SpectralRole::Swir1,
    SpectralRole::Swir2,   SpectralRole::Thermal, SpectralRole::Hotspot,
    SpectralRole::Darkspot, SpectralRole::TcH,    SpectralRole::TcV,
    SpectralRole::TcL,     SpectralRole::Aux,
};

constexpr std::size_t role_index(SpectralRole r) noexcept {
  return static_cast<std::size_t>(r);
}

/// Canonical spelling used in headers and profiles ("RED_EDGE", "SWIR1", ...).
std::string_view to_string(SpectralRole role) noexcept;
std::optional<SpectralRole> try_parse_role(std::string_view text) noexcept;
/// Throws RoleError on an unknown spelling.
SpectralRole parse_role(std::string_view text);

/// Roles whose values are surface reflectances and must lie in [0, 1].
bool is_reflectance_role(SpectralRole role) noexcept;

inline constexpr float kNodata = std::numeric_limits<float>::quiet_NaN();
inline bool is_nodata(float v) noexcept { return std::isnan(v); }

struct Band {
  SpectralRole role = SpectralRole::Aux;
  std::string name;
  std::vector<float> data;
};

/// Multi-band float raster. Construction validates shape, role uniqueness
/// and reflectance bounds, so every live BandStack is well formed.
class BandStack {
public:
  BandStack(GridMeta meta, std::vector<Band> bands);

  const GridMeta& meta() const noexcept { return meta_; }
  std::span<const Band> bands() const noexcept { return bands_; }
  std::size_t band_count() const noexcept { return bands_.size(); }

  bool has(SpectralRole role) const noexcept { return find(role) != nullptr; }
  const Band* find(SpectralRole role) const noexcept;
  /// Throws RoleError when the role is absent.
  const Band& band(SpectralRole role) const;

  friend bool operator==(const BandStack& a, const BandStack& b);

private:
  GridMeta meta_;
  std::vector<Band> bands_;
};

/// Per-pixel class labels: 0 = not feature, 1 = feature, 255 = ignore.
struct FeatureMask {
  static constexpr std::uint8_t kBackground = 0;
  static constexpr std::uint8_t kFeature = 1;
  static constexpr std::uint8_t kIgnore = 255;

  GridMeta meta;
  std::vector<std::uint8_t> data;

  void validate() const;
};

struct IndexMap {
  GridMeta meta;
  std::string index_id;
  std::vector<float> data;
  bool normalized = false;
  /// Pixels whose inputs were valid but whose formula hit a singular
  /// denominator or an invalid root.
  std::size_t singular_count = 0;

  std::size_t valid_count() const noexcept;
};

// Container I/O. A header is a JSON document next to a flat band-sequential,
// row-major, little-endian data file.

BandStack load_stack(const std::filesystem::path& header_path);
void save_stack(const BandStack& stack, const std::filesystem::path& header_path);

FeatureMask load_mask(const std::filesystem::path& header_path);
void save_mask(const FeatureMask& mask, const std::filesystem::path& header_path,
               std::string_view label = "mask");

IndexMap load_index_map(const std::filesystem::path& header_path);
void save_index_map(const IndexMap& map, const std::filesystem::path& header_path);

/// Grids from an f32le container without the BandStack role rules. Used for
/// raw sensor exports (roles assigned later by a profile) and for coefficient
/// grids that all carry the AUX role.
struct NamedGrid {
  std::string name;
  std::optional<SpectralRole> role;
  std::vector<float> data;
};
struct GridSet {
  GridMeta meta;
  std::vector<NamedGrid> grids;

  const NamedGrid* find(std::string_view name) const noexcept;
};
GridSet load_grids(const std::filesystem::path& header_path);

// Display rendering.

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> data;
};

struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> data;  // interleaved RGB
};

/// False-color composite R <- NIR, G <- RED, B <- GREEN. Each channel is
/// min-max stretched over its valid pixels; nodata renders as 0.
RgbImage cir_composite(const BandStack& stack);

/// Affine stretch of valid values onto [0, 255]. A constant map renders as
/// uniform 128. Throws DomainError when no pixel is valid.
GrayImage render_gray(const IndexMap& map);
void render_gray(const IndexMap& map, const std::filesystem::path& out_path);

void write_pgm(const GrayImage& image, const std::filesystem::path& path);
void write_ppm(const RgbImage& image, const std::filesystem::path& path);

}  // namespace msi
