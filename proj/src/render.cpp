#include <algorithm>
#include <cmath>
#include <fstream>

#include "msi/error.hpp"
#include "msi/raster.hpp"

namespace msi {

namespace {

struct ValueRange {
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
};

ValueRange valid_range(std::span<const float> data) {
  ValueRange r;
  for (float v : data) {
    if (is_nodata(v)) {
      continue;
    }
    if (!r.any) {
      r.lo = r.hi = v;
      r.any = true;
    } else {
      r.lo = std::min<double>(r.lo, v);
      r.hi = std::max<double>(r.hi, v);
    }
  }
  return r;
}

std::uint8_t to_byte(double x) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 255.0)));
}

// A band with no dynamic range is shown at its absolute reflectance, so a
// constant NIR of 1 still saturates the red channel.
void stretch_channel(std::span<const float> src, std::vector<std::uint8_t>& rgb,
                     std::size_t channel) {
  const ValueRange r = valid_range(src);
  const double span = r.hi - r.lo;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const float v = src[i];
    std::uint8_t out = 0;
    if (!is_nodata(v)) {
      out = span > 0.0 ? to_byte((v - r.lo) / span * 255.0)
                       : to_byte(std::clamp<double>(v, 0.0, 1.0) * 255.0);
    }
    rgb[3 * i + channel] = out;
  }
}

void write_netpbm(const std::filesystem::path& path, std::string_view magic, std::size_t w,
                  std::size_t h, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write image " + path.string());
  }
  out << magic << '\n' << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

}  // namespace

RgbImage cir_composite(const BandStack& stack) {
  const Band& nir = stack.band(SpectralRole::Nir);
  const Band& red = stack.band(SpectralRole::Red);
  const Band& green = stack.band(SpectralRole::Green);

  RgbImage img;
  img.width = stack.meta().width;
  img.height = stack.meta().height;
  img.data.assign(3 * img.width * img.height, 0);
  stretch_channel(nir.data, img.data, 0);
  stretch_channel(red.data, img.data, 1);
  stretch_channel(green.data, img.data, 2);
  return img;
}

GrayImage render_gray(const IndexMap& map) {
  if (map.data.size() != map.meta.pixel_count()) {
    throw DimensionError("index map does not match its grid dimensions");
  }
  const ValueRange r = valid_range(map.data);
  if (!r.any) {
    throw DomainError("cannot render an index map without valid pixels");
  }
  GrayImage img;
  img.width = map.meta.width;
  img.height = map.meta.height;
  img.data.resize(map.data.size());
  const double span = r.hi - r.lo;
  for (std::size_t i = 0; i < map.data.size(); ++i) {
    const float v = map.data[i];
    if (is_nodata(v)) {
      img.data[i] = 0;
    } else if (span > 0.0) {
      img.data[i] = to_byte((v - r.lo) / span * 255.0);
    } else {
      img.data[i] = 128;
    }
  }
  return img;
}

void render_gray(const IndexMap& map, const std::filesystem::path& out_path) {
  write_pgm(render_gray(map), out_path);
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  write_netpbm(path, "P5", image.width, image.height, image.data);
}

void write_ppm(const RgbImage& image, const std::filesystem::path& path) {
  write_netpbm(path, "P6", image.width, image.height, image.data);
}

}  // namespace msi
