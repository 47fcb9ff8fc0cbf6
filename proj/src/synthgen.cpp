#include "msi/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "msi/error.hpp"

namespace msi {

namespace fs = std::filesystem;
using nlohmann::json;

double SplitMix64::normal() noexcept {
  const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  const double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SplitMix64 row_stream(std::uint64_t seed, std::size_t row) noexcept {
  return SplitMix64(seed + (static_cast<std::uint64_t>(row) + 1) * SplitMix64::kGamma);
}

void SceneSpec::validate() const {
  meta.validate();
  if (classes.empty()) {
    throw DomainError("scene needs at least one class");
  }
  double sum = 0.0;
  std::set<std::string> labels;
  for (const auto& c : classes) {
    if (c.label.empty() || !labels.insert(c.label).second) {
      throw DomainError("class labels must be non-empty and unique");
    }
    if (!(c.fraction >= 0.0 && c.fraction <= 1.0)) {
      throw DomainError("class '" + c.label + "' has a fraction outside [0, 1]");
    }
    sum += c.fraction;
    if (c.means.empty()) {
      throw DomainError("class '" + c.label + "' has no band means");
    }
    for (const auto& [role, v] : c.means) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError("class '" + c.label + "' mean for " + std::string(to_string(role)) +
                          " lies outside [0, 1]");
      }
    }
    for (const auto& [role, sd] : c.noise) {
      if (!(sd >= 0.0) || !std::isfinite(sd)) {
        throw DomainError("class '" + c.label + "' has a negative or non-finite deviation");
      }
      if (!c.means.contains(role)) {
        throw DomainError("class '" + c.label + "' sets noise for " +
                          std::string(to_string(role)) + " without a mean");
      }
    }
    if (c.means.size() != classes.front().means.size() ||
        !std::equal(c.means.begin(), c.means.end(), classes.front().means.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw DomainError("class '" + c.label + "' covers a different band set");
    }
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw DomainError("class fractions sum to " + std::to_string(sum) + ", not 1");
  }
}

std::vector<SpectralRole> SceneSpec::roles() const {
  std::vector<SpectralRole> out;
  if (!classes.empty()) {
    for (const auto& [role, v] : classes.front().means) {
      out.push_back(role);
    }
  }
  return out;
}

std::map<SpectralRole, double> class_preset(std::string_view name) {
  using R = SpectralRole;
  auto make = [](std::array<double, 8> v) {
    return std::map<SpectralRole, double>{
        {R::Blue, v[0]},  {R::Green, v[1]}, {R::Red, v[2]},   {R::RedEdge, v[3]},
        {R::Nir, v[4]},   {R::Swir1, v[5]}, {R::Swir2, v[6]}, {R::Thermal, v[7]},
    };
  };
  if (name == "vegetation") return make({0.04, 0.08, 0.10, 0.25, 0.60, 0.25, 0.12, 0.30});
  if (name == "water") return make({0.08, 0.07, 0.05, 0.04, 0.02, 0.01, 0.005, 0.20});
  if (name == "soil") return make({0.12, 0.18, 0.30, 0.32, 0.30, 0.40, 0.35, 0.45});
  if (name == "urban") return make({0.18, 0.20, 0.22, 0.23, 0.25, 0.30, 0.28, 0.50});
  throw Error("unknown class preset '" + std::string(name) + "'");
}

const FeatureMask& Scene::mask(std::string_view label) const {
  for (const auto& [name, m] : masks) {
    if (name == label) {
      return m;
    }
  }
  throw Error("scene has no class '" + std::string(label) + "'");
}

std::vector<std::size_t> class_pixel_counts(const SceneSpec& spec) {
  const std::size_t n = spec.meta.pixel_count();
  const std::size_t k = spec.classes.size();
  std::vector<std::size_t> counts(k);
  std::vector<double> rem(k);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double quota = spec.classes[c].fraction * static_cast<double>(n);
    counts[c] = std::min(n, static_cast<std::size_t>(std::floor(quota)));
    rem[c] = quota - static_cast<double>(counts[c]);
    assigned += counts[c];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t i = 0; assigned < n; i = (i + 1) % k) {
    ++counts[order[i]];
    ++assigned;
  }
  while (assigned > n) {  // floating excess from fractions summing slightly above 1
    auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }
  return counts;
}

std::vector<std::uint32_t> class_layout(const SceneSpec& spec) {
  const std::size_t w = spec.meta.width;
  const std::size_t h = spec.meta.height;
  const std::size_t n = w * h;
  const auto counts = class_pixel_counts(spec);
  std::vector<std::uint32_t> cls(n, 0);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (spec.layout == SceneLayout::Blobs) {
    // Bump parameters come from a stream separate from the per-row noise.
    SplitMix64 rng(spec.seed ^ 0xB10B5EEDULL);
    const std::size_t bumps = 4 * spec.classes.size() + 2;
    const double extent = static_cast<double>(std::max(w, h));
    struct Bump {
      double x, y, r, a;
    };
    std::vector<Bump> field(bumps);
    for (auto& b : field) {
      b.x = rng.uniform() * static_cast<double>(w);
      b.y = rng.uniform() * static_cast<double>(h);
      b.r = extent * (0.08 + 0.17 * rng.uniform());
      b.a = rng.uniform() < 0.5 ? -1.0 : 1.0;
    }
    std::vector<double> score(n, 0.0);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        double s = 0.0;
        for (const auto& b : field) {
          const double dx = static_cast<double>(x) + 0.5 - b.x;
          const double dy = static_cast<double>(y) + 0.5 - b.y;
          s += b.a * std::exp(-(dx * dx + dy * dy) / (2.0 * b.r * b.r));
        }
        score[y * w + x] = s;
      }
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  }
  std::size_t pos = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (std::size_t i = 0; i < counts[c]; ++i) {
      cls[order[pos++]] = static_cast<std::uint32_t>(c);
    }
  }
  return cls;
}

Scene generate(const SceneSpec& spec) {
  spec.validate();
  const auto roles = spec.roles();
  const std::size_t w = spec.meta.width;
  const std::size_t h = spec.meta.height;
  const std::size_t nb = roles.size();
  const auto cls = class_layout(spec);

  // Dense per-class tables in stack order.
  std::vector<double> mean(spec.classes.size() * nb), sd(spec.classes.size() * nb, 0.0);
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    for (std::size_t b = 0; b < nb; ++b) {
      mean[c * nb + b] = spec.classes[c].means.at(roles[b]);
      if (auto it = spec.classes[c].noise.find(roles[b]); it != spec.classes[c].noise.end()) {
        sd[c * nb + b] = it->second;
      }
    }
  }

  std::vector<Band> bands(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    bands[b].role = roles[b];
    bands[b].name = std::string(to_string(roles[b]));
    bands[b].data.resize(w * h);
  }
  const auto rows = static_cast<long long>(h);
#pragma omp parallel for schedule(static)
  for (long long yy = 0; yy < rows; ++yy) {
    const auto y = static_cast<std::size_t>(yy);
    SplitMix64 rng = row_stream(spec.seed, y);
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t p = y * w + x;
      const std::size_t c = cls[p];
      for (std::size_t b = 0; b < nb; ++b) {
        const double z = rng.normal();
        const double v = std::clamp(mean[c * nb + b] + sd[c * nb + b] * z, 0.0, 1.0);
        bands[b].data[p] = static_cast<float>(v);
      }
    }
  }

  Scene scene{BandStack(spec.meta, std::move(bands)), {}};
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    FeatureMask m;
    m.meta = spec.meta;
    m.data.resize(w * h);
    for (std::size_t p = 0; p < w * h; ++p) {
      m.data[p] = cls[p] == c ? FeatureMask::kFeature : FeatureMask::kBackground;
    }
    scene.masks.emplace_back(spec.classes[c].label, std::move(m));
  }
  return scene;
}

namespace {

std::map<SpectralRole, double> role_table(const json& obj, const std::string& what) {
  if (!obj.is_object()) {
    throw FormatError(what + " must be an object keyed by role");
  }
  std::map<SpectralRole, double> out;
  for (const auto& [key, value] : obj.items()) {
    if (!value.is_number()) {
      throw FormatError(what + " entry " + key + " is not a number");
    }
    out[parse_role(key)] = value.get<double>();
  }
  return out;
}

}  // namespace

SceneSpec parse_scene_spec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed scene spec: ") + e.what());
  }
  try {
    SceneSpec spec;
    spec.meta.width = doc.at("width").get<std::size_t>();
    spec.meta.height = doc.at("height").get<std::size_t>();
    if (doc.contains("pixel_size")) {
      spec.meta.pixel_size = doc["pixel_size"].get<double>();
    }
    spec.seed = doc.value("seed", std::uint64_t{0});
    const std::string layout = doc.value("layout", std::string("stripes"));
    if (layout == "stripes") {
      spec.layout = SceneLayout::Stripes;
    } else if (layout == "blobs") {
      spec.layout = SceneLayout::Blobs;
    } else {
      throw FormatError("unknown layout '" + layout + "'");
    }
    for (const auto& jc : doc.at("classes")) {
      SceneClass c;
      c.label = jc.at("label").get<std::string>();
      c.fraction = jc.at("fraction").get<double>();
      if (jc.contains("preset")) {
        c.means = class_preset(jc["preset"].get<std::string>());
      }
      if (jc.contains("means")) {
        for (const auto& [role, v] : role_table(jc["means"], "means")) {
          c.means[role] = v;
        }
      }
      if (jc.contains("noise_all")) {
        const double sd = jc["noise_all"].get<double>();
        for (const auto& [role, v] : c.means) {
          c.noise[role] = sd;
        }
      }
      if (jc.contains("noise")) {
        for (const auto& [role, v] : role_table(jc["noise"], "noise")) {
          c.noise[role] = v;
        }
      }
      spec.classes.push_back(std::move(c));
    }
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid scene spec: ") + e.what());
  }
}

SceneSpec load_scene_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open scene spec " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene_spec(ss.str());
}

void save_scene(const Scene& scene, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  save_stack(scene.stack, out_dir / "stack.json");
  for (const auto& [label, mask] : scene.masks) {
    save_mask(mask, out_dir / ("mask_" + label + ".json"), label);
  }
}

}  // namespace msi
