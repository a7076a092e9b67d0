#include "edt.hpp"

#include <limits>

#include "error.hpp"

namespace pf {

namespace {

constexpr double kInf = std::numeric_limits<double>::max() / 4.0;

// 1D squared distance transform of sampled function f (lower envelope of
// parabolas), n values with given stride.
void dt1d(double* f, int n, size_t stride, std::vector<double>& scratch, std::vector<int>& v,
          std::vector<double>& z) {
  scratch.resize(n);
  v.resize(n);
  z.resize(n + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double fq = f[q * stride];
    double s;
    while (true) {
      double fv = f[v[k] * stride];
      s = ((fq + static_cast<double>(q) * q) - (fv + static_cast<double>(v[k]) * v[k])) /
          (2.0 * q - 2.0 * v[k]);
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double d = q - v[k];
    scratch[q] = d * d + f[v[k] * stride];
  }
  for (int q = 0; q < n; ++q) f[q * stride] = scratch[q];
}

}  // namespace

std::vector<double> squared_distance_transform(const std::vector<uint8_t>& mask,
                                               const Eigen::Vector3i& dims) {
  const int nx = dims.x(), ny = dims.y(), nz = dims.z();
  require(mask.size() == static_cast<size_t>(nx) * ny * nz, Status::InvalidArgument,
          "distance transform mask size mismatch");
  std::vector<double> d(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) d[i] = mask[i] ? 0.0 : kInf;

  std::vector<double> scratch, z;
  std::vector<int> v;
  // x passes
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      dt1d(&d[(static_cast<size_t>(k) * ny + j) * nx], nx, 1, scratch, v, z);
  // y passes
  for (int k = 0; k < nz; ++k)
    for (int i = 0; i < nx; ++i)
      dt1d(&d[static_cast<size_t>(k) * ny * nx + i], ny, nx, scratch, v, z);
  // z passes
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      dt1d(&d[static_cast<size_t>(j) * nx + i], nz, static_cast<size_t>(nx) * ny, scratch, v, z);
  return d;
}

}  // namespace pf
