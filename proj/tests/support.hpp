// Shared helpers for the unit and acceptance tests.
#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "msi/indices.hpp"
#include "msi/raster.hpp"
#include "msi/synthgen.hpp"

#ifndef MSI_TEST_DATA_DIR
#error "MSI_TEST_DATA_DIR must be defined"
#endif
#ifndef MSI_FIXTURE_DIR
#error "MSI_FIXTURE_DIR must be defined"
#endif

namespace msi::test {

namespace fs = std::filesystem;

inline fs::path data_dir() { return fs::path(MSI_TEST_DATA_DIR); }
inline fs::path fixture_dir() { return fs::path(MSI_FIXTURE_DIR); }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("msi_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool close_rel(double a, double b, double rel, double abs_floor = 0.0) {
  if (std::isnan(a) || std::isnan(b)) {
    return std::isnan(a) && std::isnan(b);
  }
  return std::abs(a - b) <= std::max(rel * std::abs(b), abs_floor);
}

/// Uniform reflectance stack with the given roles; values in [lo, hi].
inline BandStack random_stack(std::size_t w, std::size_t h, std::uint64_t seed,
                              const std::vector<SpectralRole>& roles, double lo = 0.01,
                              double hi = 1.0) {
  SplitMix64 rng(seed);
  std::vector<Band> bands;
  for (auto r : roles) {
    Band b{r, std::string(to_string(r)), std::vector<float>(w * h)};
    for (auto& v : b.data) {
      v = static_cast<float>(lo + (hi - lo) * rng.uniform());
    }
    bands.push_back(std::move(b));
  }
  GridMeta meta;
  meta.width = w;
  meta.height = h;
  return BandStack(meta, std::move(bands));
}

inline const std::vector<SpectralRole>& nominal_roles() {
  static const std::vector<SpectralRole> roles = {
      SpectralRole::Blue, SpectralRole::Green, SpectralRole::Red,   SpectralRole::RedEdge,
      SpectralRole::Nir,  SpectralRole::Swir1, SpectralRole::Swir2,
  };
  return roles;
}

// ---------------------------------------------------------------------------
// Frozen index oracle (tests/oracle/index_oracle.py).

struct IndexOracle {
  nlohmann::json manifest;
  std::vector<std::string> indices;
  std::size_t pixels = 0;
  std::uint64_t seed_base = 0;
  std::vector<double> expected;  // index-major

  double value(std::size_t k, std::size_t pixel) const { return expected[k * pixels + pixel]; }
};

inline IndexOracle load_index_oracle() {
  IndexOracle o;
  o.manifest = nlohmann::json::parse(slurp(data_dir() / "index_oracle.json"));
  o.indices = o.manifest.at("indices").get<std::vector<std::string>>();
  o.pixels = o.manifest.at("pixels").get<std::size_t>();
  o.seed_base = o.manifest.at("seed_base").get<std::uint64_t>();
  const std::string raw = slurp(data_dir() / "index_oracle.f64");
  o.expected.resize(raw.size() / sizeof(double));
  std::memcpy(o.expected.data(), raw.data(), o.expected.size() * sizeof(double));
  return o;
}

/// One oracle pixel, drawn in the manifest's order.
inline PixelSample oracle_pixel(SplitMix64& rng) {
  using R = SpectralRole;
  PixelSample s;
  auto refl = [&] { return 0.01 + 0.99 * rng.uniform(); };
  s.set(R::Blue, refl());
  s.set(R::Green, refl());
  s.set(R::Red, refl());
  s.set(R::RedEdge, refl());
  s.set(R::Nir, refl());
  s.set(R::Swir1, refl());
  s.set(R::Swir2, refl());
  s.set(R::Thermal, 250.0 + 80.0 * rng.uniform());
  s.set(R::Hotspot, refl());
  s.set(R::Darkspot, refl());
  s.set(R::TcH, refl());
  s.set(R::TcV, refl());
  s.set(R::TcL, refl());
  UpdmSample u;
  u.vegetation = rng.uniform();
  u.soil = rng.uniform();
  u.water = rng.uniform();
  u.yellow = rng.uniform();
  s.updm = u;
  return s;
}

inline ImageContext oracle_context(const IndexOracle& o) {
  const auto& c = o.manifest.at("context");
  ImageContext ctx;
  ctx.m_red = c.at("m_red").get<double>();
  for (auto comp : kAsiComponents) {
    const auto mm = c.at("minmax").at(std::string(to_string(comp)));
    ctx.component_minmax[static_cast<std::size_t>(comp)] =
        MinMax{mm.at(0).get<double>(), mm.at(1).get<double>()};
  }
  MuwiCoefficients muwi;
  for (const auto& [role, w] : c.at("muwi").at("weights").items()) {
    muwi.weights.emplace_back(parse_role(role), w.get<double>());
  }
  muwi.offset = c.at("muwi").at("offset").get<double>();
  ctx.muwi = muwi;
  return ctx;
}

// ---------------------------------------------------------------------------
// Frozen statistics oracle (tests/oracle/stats_oracle.py).

struct StatsCase {
  std::string test;
  std::vector<std::vector<double>> groups;
  double statistic = 0.0;
  double p_value = std::nan("");
};

inline std::vector<StatsCase> load_stats_oracle() {
  std::vector<StatsCase> out;
  std::istringstream in(slurp(data_dir() / "stats_oracle.csv"));
  std::string line;
  std::getline(in, line);  // header
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
      if (ch == sep) {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    parts.push_back(cur);
    return parts;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    StatsCase c;
    c.test = f.at(1);
    for (const auto& g : split(f.at(2), '|')) {
      std::vector<double> values;
      for (const auto& v : split(g, ';')) values.push_back(std::stod(v));
      c.groups.push_back(std::move(values));
    }
    c.statistic = std::stod(f.at(3));
    if (!f.at(4).empty()) c.p_value = std::stod(f.at(4));
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic scenes.

/// Two-class stripes from the vegetation and soil presets.
inline SceneSpec two_class_spec(std::size_t w, std::size_t h, double noise, std::uint64_t seed,
                                SceneLayout layout = SceneLayout::Stripes) {
  SceneSpec spec;
  spec.meta.width = w;
  spec.meta.height = h;
  spec.layout = layout;
  spec.seed = seed;
  for (const char* name : {"vegetation", "soil"}) {
    SceneClass c;
    c.label = name;
    c.fraction = 0.5;
    c.means = class_preset(name);
    for (const auto& [role, v] : c.means) {
      c.noise[role] = noise;
    }
    spec.classes.push_back(std::move(c));
  }
  return spec;
}

}  // namespace msi::test
