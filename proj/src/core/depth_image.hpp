#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pf {

// Row-major depth in meters; 0 marks an invalid pixel. On disk: "PFDM",
// u32 width, u32 height, u32 reserved, then little-endian f32 samples.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  static DepthImage zeros(int w, int h) { return DepthImage{w, h, std::vector<float>(static_cast<size_t>(w) * h, 0.0f)}; }

  float at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
  float& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
  bool valid(int x, int y) const { return at(x, y) > 0.0f; }

  // Bilinear sample at continuous pixel coordinates; nullopt if the footprint
  // leaves the image or touches an invalid pixel.
  std::optional<double> sample_bilinear(double u, double v) const;
  // Nearest-pixel sample; nullopt outside the image or on an invalid pixel.
  std::optional<double> sample_nearest(double u, double v) const;

  void validate() const;
};

void save_pfdm(const DepthImage& img, const std::string& path);
DepthImage load_pfdm(const std::string& path);

}  // namespace pf
