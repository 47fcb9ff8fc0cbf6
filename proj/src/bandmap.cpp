#include "msi/bandmap.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "msi/error.hpp"

namespace msi {

using nlohmann::json;

void SensorProfile::validate() const {
  std::array<bool, kRoleCount> seen{};
  for (std::size_t i = 0; i < mapping.size(); ++i) {
    const auto& [name, role] = mapping[i];
    if (std::exchange(seen[role_index(role)], true)) {
      throw RoleError("profile '" + sensor_id + "' maps two bands to " +
                      std::string(to_string(role)));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (mapping[j].first == name) {
        throw RoleError("profile '" + sensor_id + "' lists band '" + name + "' twice");
      }
    }
  }
}

std::optional<SpectralRole> SensorProfile::role_of(std::string_view band_name) const noexcept {
  for (const auto& [name, role] : mapping) {
    if (name == band_name) {
      return role;
    }
  }
  return std::nullopt;
}

const SensorProfile& sentinel2_profile() {
  static const SensorProfile p{"sentinel2",
                               {{"B02", SpectralRole::Blue},
                                {"B03", SpectralRole::Green},
                                {"B04", SpectralRole::Red},
                                {"B05", SpectralRole::RedEdge},
                                {"B08", SpectralRole::Nir},
                                {"B11", SpectralRole::Swir1},
                                {"B12", SpectralRole::Swir2}}};
  return p;
}

const SensorProfile& landsat8_profile() {
  static const SensorProfile p{"landsat8",
                               {{"B2", SpectralRole::Blue},
                                {"B3", SpectralRole::Green},
                                {"B4", SpectralRole::Red},
                                {"B5", SpectralRole::Nir},
                                {"B6", SpectralRole::Swir1},
                                {"B7", SpectralRole::Swir2},
                                {"B10", SpectralRole::Thermal}}};
  return p;
}

SensorProfile parse_profile(std::string_view json_text) {
  SensorProfile p;
  try {
    const json doc = json::parse(json_text);
    p.sensor_id = doc.at("sensor_id").get<std::string>();
    const auto& m = doc.at("mapping");
    if (!m.is_object()) {
      throw FormatError("profile mapping must be an object");
    }
    for (const auto& [name, role] : m.items()) {
      p.mapping.emplace_back(name, parse_role(role.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed sensor profile: ") + e.what());
  }
  p.validate();
  return p;
}

SensorProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open profile " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_profile(ss.str());
}

SensorProfile select_profile(std::string_view id_or_path) {
  if (id_or_path == "sentinel2") {
    return sentinel2_profile();
  }
  if (id_or_path == "landsat8") {
    return landsat8_profile();
  }
  return load_profile(std::filesystem::path(id_or_path));
}

std::vector<SpectralRole> resolve_roles(std::span<const std::string> band_names,
                                        const SensorProfile& profile) {
  std::vector<SpectralRole> roles;
  roles.reserve(band_names.size());
  std::array<bool, kRoleCount> seen{};
  for (const auto& name : band_names) {
    const auto role = profile.role_of(name);
    if (!role) {
      throw RoleError("band '" + name + "' is not mapped by profile '" + profile.sensor_id + "'");
    }
    if (std::exchange(seen[role_index(*role)], true)) {
      throw RoleError("two bands resolve to " + std::string(to_string(*role)));
    }
    roles.push_back(*role);
  }
  return roles;
}

BandStack ingest(const GridSet& raw, const SensorProfile& profile) {
  std::vector<std::string> names;
  for (const auto& g : raw.grids) {
    names.push_back(g.name);
  }
  const auto roles = resolve_roles(names, profile);
  std::vector<Band> bands;
  for (std::size_t i = 0; i < raw.grids.size(); ++i) {
    bands.push_back(Band{roles[i], raw.grids[i].name, raw.grids[i].data});
  }
  return BandStack(raw.meta, std::move(bands));
}

}  // namespace msi
