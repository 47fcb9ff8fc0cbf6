#include "msi/raster.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "msi/error.hpp"

namespace msi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kRoleCount> kRoleNames = {
    "BLUE",    "GREEN",    "RED",  "RED_EDGE", "NIR",  "SWIR1", "SWIR2",
    "THERMAL", "HOTSPOT",  "DARKSPOT", "TC_H", "TC_V", "TC_L", "AUX",
};

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
}

void write_f32le(std::ostream& os, std::span<const float> values) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(values.data()),
             static_cast<std::streamsize>(values.size() * sizeof(float)));
  } else {
    for (float v : values) {
      const std::uint32_t bits = to_le(std::bit_cast<std::uint32_t>(v));
      os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
}

void read_f32le(std::istream& is, std::span<float> out) {
  is.read(reinterpret_cast<char*>(out.data()),
          static_cast<std::streamsize>(out.size() * sizeof(float)));
  if constexpr (std::endian::native != std::endian::little) {
    for (float& v : out) {
      v = std::bit_cast<float>(to_le(std::bit_cast<std::uint32_t>(v)));
    }
  }
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open header " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("malformed header " + path.string() + ": " + e.what());
  }
}

void write_json(const json& doc, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write header " + path.string());
  }
  out << doc.dump(2) << '\n';
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

fs::path data_path_for(const fs::path& header_path) {
  fs::path p = header_path;
  p.replace_extension(".bin");
  return p;
}

struct ParsedHeader {
  GridMeta meta;
  std::string dtype;
  fs::path data_path;
  json bands;  // array
  json doc;
};

ParsedHeader parse_header(const fs::path& header_path, std::string_view expected_dtype) {
  json doc = read_json(header_path);
  ParsedHeader h;
  try {
    if (!doc.is_object()) {
      throw FormatError("header is not a JSON object");
    }
    const auto& w = doc.at("width");
    const auto& ht = doc.at("height");
    if (!w.is_number_integer() || !ht.is_number_integer() || w.get<long long>() < 1 ||
        ht.get<long long>() < 1) {
      throw FormatError("width and height must be positive integers");
    }
    h.meta.width = w.get<std::size_t>();
    h.meta.height = ht.get<std::size_t>();
    if (auto it = doc.find("pixel_size"); it != doc.end() && !it->is_null()) {
      h.meta.pixel_size = it->get<double>();
    }
    if (auto it = doc.find("crs_label"); it != doc.end() && it->is_string()) {
      h.meta.crs_label = it->get<std::string>();
    }
    h.dtype = doc.at("dtype").get<std::string>();
    if (h.dtype != expected_dtype) {
      throw FormatError("expected dtype " + std::string(expected_dtype) + ", got " + h.dtype);
    }
    h.data_path = header_path.parent_path() / doc.at("data").get<std::string>();
    h.bands = doc.at("bands");
    if (!h.bands.is_array() || h.bands.empty()) {
      throw FormatError("bands must be a non-empty array");
    }
  } catch (const json::exception& e) {
    throw FormatError("malformed header " + header_path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError("malformed header " + header_path.string() + ": " + e.what());
  }
  h.doc = std::move(doc);
  return h;
}

std::vector<char> read_all(const fs::path& path, std::size_t expected_bytes) {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec) {
    throw IoError("cannot stat data file " + path.string());
  }
  if (size != expected_bytes) {
    std::ostringstream msg;
    msg << "data file " << path.string() << " holds " << size << " bytes, header declares "
        << expected_bytes;
    throw DimensionError(msg.str());
  }
  std::vector<char> buf(expected_bytes);
  std::ifstream in(path, std::ios::binary);
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!in) {
    throw IoError("short read on " + path.string());
  }
  return buf;
}

std::vector<std::vector<float>> read_f32_layers(const fs::path& path, std::size_t layers,
                                                std::size_t pixels) {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec) {
    throw IoError("cannot stat data file " + path.string());
  }
  const std::size_t expected = layers * pixels * sizeof(float);
  if (size != expected) {
    std::ostringstream msg;
    msg << "data file " << path.string() << " holds " << size << " bytes, header declares "
        << expected;
    throw DimensionError(msg.str());
  }
  std::ifstream in(path, std::ios::binary);
  std::vector<std::vector<float>> out(layers, std::vector<float>(pixels));
  for (auto& layer : out) {
    read_f32le(in, layer);
  }
  if (!in) {
    throw IoError("short read on " + path.string());
  }
  return out;
}

json meta_to_json(const GridMeta& meta) {
  json doc;
  doc["width"] = meta.width;
  doc["height"] = meta.height;
  if (meta.pixel_size) {
    doc["pixel_size"] = *meta.pixel_size;
  }
  if (!meta.crs_label.empty()) {
    doc["crs_label"] = meta.crs_label;
  }
  return doc;
}

void write_f32_file(const fs::path& path, const std::vector<std::span<const float>>& layers) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write data file " + path.string());
  }
  for (const auto& layer : layers) {
    write_f32le(out, layer);
  }
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

}  // namespace

void GridMeta::validate() const {
  if (width < 1 || height < 1) {
    throw DimensionError("grid dimensions must be at least 1x1");
  }
}

std::string_view to_string(SpectralRole role) noexcept { return kRoleNames[role_index(role)]; }

std::optional<SpectralRole> try_parse_role(std::string_view text) noexcept {
  for (std::size_t i = 0; i < kRoleCount; ++i) {
    if (kRoleNames[i] == text) {
      return kAllRoles[i];
    }
  }
  return std::nullopt;
}

SpectralRole parse_role(std::string_view text) {
  if (auto r = try_parse_role(text)) {
    return *r;
  }
  throw RoleError("unknown spectral role '" + std::string(text) + "'");
}

bool is_reflectance_role(SpectralRole role) noexcept {
  switch (role) {
    case SpectralRole::Blue:
    case SpectralRole::Green:
    case SpectralRole::Red:
    case SpectralRole::RedEdge:
    case SpectralRole::Nir:
    case SpectralRole::Swir1:
    case SpectralRole::Swir2:
    case SpectralRole::Hotspot:
    case SpectralRole::Darkspot:
      return true;
    default:
      return false;
  }
}

BandStack::BandStack(GridMeta meta, std::vector<Band> bands)
    : meta_(std::move(meta)), bands_(std::move(bands)) {
  meta_.validate();
  if (bands_.empty()) {
    throw DimensionError("a band stack needs at least one band");
  }
  std::array<bool, kRoleCount> seen{};
  for (const auto& b : bands_) {
    if (seen[role_index(b.role)]) {
      throw RoleError("duplicate spectral role " + std::string(to_string(b.role)));
    }
    seen[role_index(b.role)] = true;
    if (b.data.size() != meta_.pixel_count()) {
      throw DimensionError("band '" + b.name + "' does not match the grid dimensions");
    }
  }
  for (const auto& b : bands_) {
    if (!is_reflectance_role(b.role)) {
      continue;
    }
    for (float v : b.data) {
      if (!is_nodata(v) && !(v >= 0.0f && v <= 1.0f)) {
        throw DomainError("reflectance band '" + b.name + "' holds a value outside [0, 1]");
      }
    }
  }
}

const Band* BandStack::find(SpectralRole role) const noexcept {
  for (const auto& b : bands_) {
    if (b.role == role) {
      return &b;
    }
  }
  return nullptr;
}

const Band& BandStack::band(SpectralRole role) const {
  if (const Band* b = find(role)) {
    return *b;
  }
  throw RoleError("stack has no " + std::string(to_string(role)) + " band");
}

bool operator==(const BandStack& a, const BandStack& b) {
  if (!a.meta_.same_shape(b.meta_) || a.bands_.size() != b.bands_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.bands_.size(); ++i) {
    const auto& x = a.bands_[i];
    const auto& y = b.bands_[i];
    if (x.role != y.role || x.name != y.name) {
      return false;
    }
    // Bitwise so NaN sentinels compare equal to themselves.
    if (std::memcmp(x.data.data(), y.data.data(), x.data.size() * sizeof(float)) != 0) {
      return false;
    }
  }
  return true;
}

void FeatureMask::validate() const {
  meta.validate();
  if (data.size() != meta.pixel_count()) {
    throw DimensionError("mask does not match its grid dimensions");
  }
  for (auto v : data) {
    if (v != kBackground && v != kFeature && v != kIgnore) {
      throw FormatError("mask holds a value outside {0, 1, 255}");
    }
  }
}

std::size_t IndexMap::valid_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(data.begin(), data.end(), [](float v) { return !is_nodata(v); }));
}

BandStack load_stack(const fs::path& header_path) {
  auto h = parse_header(header_path, "f32le");
  std::vector<Band> bands;
  bands.reserve(h.bands.size());
  try {
    for (const auto& jb : h.bands) {
      Band b;
      b.name = jb.at("name").get<std::string>();
      b.role = parse_role(jb.at("role").get<std::string>());
      bands.push_back(std::move(b));
    }
  } catch (const json::exception& e) {
    throw FormatError("malformed band entry in " + header_path.string() + ": " + e.what());
  }
  std::array<bool, kRoleCount> seen{};
  for (const auto& b : bands) {
    if (std::exchange(seen[role_index(b.role)], true)) {
      throw RoleError("duplicate spectral role " + std::string(to_string(b.role)) + " in " +
                      header_path.string());
    }
  }
  auto layers = read_f32_layers(h.data_path, bands.size(), h.meta.pixel_count());
  for (std::size_t i = 0; i < bands.size(); ++i) {
    bands[i].data = std::move(layers[i]);
  }
  return BandStack(h.meta, std::move(bands));
}

void save_stack(const BandStack& stack, const fs::path& header_path) {
  const fs::path data = data_path_for(header_path);
  json doc = meta_to_json(stack.meta());
  doc["dtype"] = "f32le";
  doc["data"] = data.filename().string();
  doc["bands"] = json::array();
  std::vector<std::span<const float>> layers;
  for (const auto& b : stack.bands()) {
    doc["bands"].push_back({{"name", b.name}, {"role", std::string(to_string(b.role))}});
    layers.emplace_back(b.data);
  }
  write_f32_file(data, layers);
  write_json(doc, header_path);
}

FeatureMask load_mask(const fs::path& header_path) {
  auto h = parse_header(header_path, "u8");
  if (h.bands.size() != 1) {
    throw FormatError("mask header must declare exactly one layer: " + header_path.string());
  }
  auto bytes = read_all(h.data_path, h.meta.pixel_count());
  FeatureMask mask;
  mask.meta = h.meta;
  mask.data.assign(bytes.begin(), bytes.end());
  mask.validate();
  return mask;
}

void save_mask(const FeatureMask& mask, const fs::path& header_path, std::string_view label) {
  mask.validate();
  const fs::path data = data_path_for(header_path);
  json doc = meta_to_json(mask.meta);
  doc["dtype"] = "u8";
  doc["data"] = data.filename().string();
  doc["bands"] = json::array({{{"name", std::string(label)}, {"role", "AUX"}}});
  {
    std::ofstream out(data, std::ios::binary);
    out.write(reinterpret_cast<const char*>(mask.data.data()),
              static_cast<std::streamsize>(mask.data.size()));
    if (!out) {
      throw IoError("cannot write mask data " + data.string());
    }
  }
  write_json(doc, header_path);
}

IndexMap load_index_map(const fs::path& header_path) {
  auto h = parse_header(header_path, "f32le");
  if (h.bands.size() != 1) {
    throw FormatError("index map header must declare exactly one layer: " +
                      header_path.string());
  }
  IndexMap map;
  map.meta = h.meta;
  try {
    map.index_id = h.doc.value("index_id", h.bands.at(0).at("name").get<std::string>());
    map.normalized = h.doc.value("normalized", false);
    map.singular_count = h.doc.value("singular_count", std::size_t{0});
  } catch (const json::exception& e) {
    throw FormatError("malformed index map header " + header_path.string() + ": " + e.what());
  }
  map.data = std::move(read_f32_layers(h.data_path, 1, h.meta.pixel_count()).front());
  return map;
}

void save_index_map(const IndexMap& map, const fs::path& header_path) {
  map.meta.validate();
  if (map.data.size() != map.meta.pixel_count()) {
    throw DimensionError("index map does not match its grid dimensions");
  }
  const fs::path data = data_path_for(header_path);
  json doc = meta_to_json(map.meta);
  doc["dtype"] = "f32le";
  doc["data"] = data.filename().string();
  doc["bands"] = json::array({{{"name", map.index_id}, {"role", "AUX"}}});
  doc["index_id"] = map.index_id;
  doc["normalized"] = map.normalized;
  doc["singular_count"] = map.singular_count;
  write_f32_file(data, {std::span<const float>(map.data)});
  write_json(doc, header_path);
}

const NamedGrid* GridSet::find(std::string_view name) const noexcept {
  for (const auto& g : grids) {
    if (g.name == name) {
      return &g;
    }
  }
  return nullptr;
}

GridSet load_grids(const fs::path& header_path) {
  auto h = parse_header(header_path, "f32le");
  GridSet set;
  set.meta = h.meta;
  try {
    for (const auto& jb : h.bands) {
      NamedGrid g;
      g.name = jb.at("name").get<std::string>();
      if (auto it = jb.find("role"); it != jb.end() && it->is_string()) {
        g.role = try_parse_role(it->get<std::string>());
      }
      set.grids.push_back(std::move(g));
    }
  } catch (const json::exception& e) {
    throw FormatError("malformed band entry in " + header_path.string() + ": " + e.what());
  }
  std::set<std::string> names;
  for (const auto& g : set.grids) {
    if (!names.insert(g.name).second) {
      throw FormatError("duplicate band name '" + g.name + "' in " + header_path.string());
    }
  }
  auto layers = read_f32_layers(h.data_path, set.grids.size(), h.meta.pixel_count());
  for (std::size_t i = 0; i < set.grids.size(); ++i) {
    set.grids[i].data = std::move(layers[i]);
  }
  return set;
}

}  // namespace msi
