#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msi/raster.hpp"

namespace msi {

/// SplitMix64 (Steele, Lea, Flood 2014). State advances by the golden-ratio
/// increment; output is the standard 30/27/31 xor-shift multiply mix.
class SplitMix64 {
public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += kGamma);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Standard normal by Box-Muller, cosine branch only: one draw consumes
  /// two outputs, u1 in (0, 1] and u2 in [0, 1).
  double normal() noexcept;

private:
  std::uint64_t state_;
};

/// Stream for one image row: seed + (row + 1) * kGamma.
SplitMix64 row_stream(std::uint64_t seed, std::size_t row) noexcept;

enum class SceneLayout { Stripes, Blobs };

struct SceneClass {
  std::string label;
  double fraction = 0.0;
  std::map<SpectralRole, double> means;
  std::map<SpectralRole, double> noise;  // standard deviations, absent = 0
};

struct SceneSpec {
  GridMeta meta;
  std::vector<SceneClass> classes;
  SceneLayout layout = SceneLayout::Stripes;
  std::uint64_t seed = 0;

  /// Throws DomainError for fractions not summing to 1 (+-1e-9), means
  /// outside [0, 1], negative deviations, duplicate labels, or classes
  /// that disagree on their role set.
  void validate() const;
  /// Roles of the generated stack, in canonical order.
  std::vector<SpectralRole> roles() const;
};

/// Qualitative role means for "vegetation", "water", "soil" and "urban"
/// over BLUE, GREEN, RED, RED_EDGE, NIR, SWIR1, SWIR2 and THERMAL. Not
/// calibrated against any sensor. Throws Error for an unknown name.
std::map<SpectralRole, double> class_preset(std::string_view name);

struct Scene {
  BandStack stack;
  std::vector<std::pair<std::string, FeatureMask>> masks;  // spec class order
  const FeatureMask& mask(std::string_view label) const;
};

/// Pixel counts per class by largest remainder; they sum to the pixel count
/// and each is within one pixel of fraction x count.
std::vector<std::size_t> class_pixel_counts(const SceneSpec& spec);

/// Class index per pixel. Stripes fill row-major runs in class order; blobs
/// rank pixels on a seeded field of Gaussian bumps and cut the ranking at
/// the class counts.
std::vector<std::uint32_t> class_layout(const SceneSpec& spec);

/// Deterministic scene for a fixed spec. Every pixel draws one normal per
/// band, in stack order, from its row stream, whether or not the class adds
/// noise to that band; values are clamped to [0, 1].
Scene generate(const SceneSpec& spec);

/// `{"width", "height", "layout": "stripes"|"blobs", "seed",
///   "classes": [{"label", "fraction", "preset"?, "means": {ROLE: v},
///                "noise": {ROLE: sd}, "noise_all": sd}]}`
/// Explicit means override preset values; noise_all applies to every role
/// without an explicit noise entry.
SceneSpec parse_scene_spec(std::string_view json_text);
SceneSpec load_scene_spec(const std::filesystem::path& path);

/// stack.json plus mask_<label>.json per class.
void save_scene(const Scene& scene, const std::filesystem::path& out_dir);

}  // namespace msi
