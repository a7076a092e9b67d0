#include "depth_image.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>

#include "error.hpp"

namespace pf {

std::optional<double> DepthImage::sample_bilinear(double u, double v) const {
  if (!(u >= 0.0 && v >= 0.0 && u <= width - 1.0 && v <= height - 1.0)) return std::nullopt;
  int x0 = static_cast<int>(u);
  int y0 = static_cast<int>(v);
  if (x0 == width - 1) x0--;
  if (y0 == height - 1) y0--;
  if (width == 1) x0 = 0;
  if (height == 1) y0 = 0;
  int x1 = std::min(x0 + 1, width - 1);
  int y1 = std::min(y0 + 1, height - 1);
  double fu = u - x0, fv = v - y0;
  double d00 = at(x0, y0), d10 = at(x1, y0), d01 = at(x0, y1), d11 = at(x1, y1);
  if (d00 <= 0.0 || d10 <= 0.0 || d01 <= 0.0 || d11 <= 0.0) return std::nullopt;
  return (d00 * (1 - fu) + d10 * fu) * (1 - fv) + (d01 * (1 - fu) + d11 * fu) * fv;
}

std::optional<double> DepthImage::sample_nearest(double u, double v) const {
  int x = static_cast<int>(std::lround(u));
  int y = static_cast<int>(std::lround(v));
  if (x < 0 || y < 0 || x >= width || y >= height) return std::nullopt;
  double d = at(x, y);
  if (d <= 0.0) return std::nullopt;
  return d;
}

void DepthImage::validate() const {
  require(width >= 1 && height >= 1, Status::InvalidArgument, "depth image is empty");
  require(values.size() == static_cast<size_t>(width) * height, Status::InvalidArgument,
          "depth image buffer size mismatch");
  for (float v : values) {
    require(std::isfinite(v) && v >= 0.0f, Status::InvalidArgument,
            "depth image has non-finite or negative samples");
  }
}

void save_pfdm(const DepthImage& img, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  require(f != nullptr, Status::Io, "cannot open for writing: " + path);
  uint32_t header[3] = {static_cast<uint32_t>(img.width), static_cast<uint32_t>(img.height), 0u};
  bool ok = std::fwrite("PFDM", 1, 4, f) == 4 && std::fwrite(header, 4, 3, f) == 3 &&
            std::fwrite(img.values.data(), 4, img.values.size(), f) == img.values.size();
  std::fclose(f);
  require(ok, Status::Io, "short write: " + path);
}

DepthImage load_pfdm(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  require(f != nullptr, Status::Io, "cannot open: " + path);
  char magic[4];
  uint32_t header[3];
  if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, "PFDM", 4) != 0) {
    std::fclose(f);
    fail(Status::Format, "not a PFDM file (bad magic at offset 0): %s", path.c_str());
  }
  if (std::fread(header, 4, 3, f) != 3) {
    std::fclose(f);
    fail(Status::Format, "truncated PFDM header at offset 4: %s", path.c_str());
  }
  DepthImage img;
  img.width = static_cast<int>(header[0]);
  img.height = static_cast<int>(header[1]);
  if (img.width < 1 || img.height < 1 || static_cast<uint64_t>(img.width) * img.height > (1u << 28)) {
    std::fclose(f);
    fail(Status::Format, "implausible PFDM dimensions %dx%d: %s", img.width, img.height,
         path.c_str());
  }
  img.values.resize(static_cast<size_t>(img.width) * img.height);
  size_t got = std::fread(img.values.data(), 4, img.values.size(), f);
  std::fclose(f);
  if (got != img.values.size()) {
    fail(Status::Format, "truncated PFDM payload at offset %zu: %s", 16 + got * 4, path.c_str());
  }
  img.validate();
  return img;
}

}  // namespace pf
