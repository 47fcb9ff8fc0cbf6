#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msi/raster.hpp"

namespace msi {

/// Sensor band names mapped onto spectral roles.
struct SensorProfile {
  std::string sensor_id;
  std::vector<std::pair<std::string, SpectralRole>> mapping;

  /// Throws RoleError if a role or band name appears twice.
  void validate() const;
  std::optional<SpectralRole> role_of(std::string_view band_name) const noexcept;
};

/// Sentinel-2 MSI: B02 BLUE, B03 GREEN, B04 RED, B05 RED_EDGE, B08 NIR,
/// B11 SWIR1, B12 SWIR2.
const SensorProfile& sentinel2_profile();
/// Landsat 8 OLI/TIRS: B2 BLUE, B3 GREEN, B4 RED, B5 NIR, B6 SWIR1,
/// B7 SWIR2, B10 THERMAL.
const SensorProfile& landsat8_profile();

/// `{"sensor_id": str, "mapping": {band_name: role}}`
SensorProfile load_profile(const std::filesystem::path& path);
SensorProfile parse_profile(std::string_view json_text);

/// Built-in id ("sentinel2", "landsat8") or a path to a profile file.
SensorProfile select_profile(std::string_view id_or_path);

/// Roles in stack order. Throws RoleError for an unmapped name or when two
/// names land on the same role.
std::vector<SpectralRole> resolve_roles(std::span<const std::string> band_names,
                                        const SensorProfile& profile);

/// Builds a BandStack from raw named grids by resolving names through the
/// profile.
BandStack ingest(const GridSet& raw, const SensorProfile& profile);

}  // namespace msi
