#include "geometry.hpp"

#include <cmath>

namespace pf {

Mat3 axis_angle_to_matrix(const Vec3& aa) {
  double angle = aa.norm();
  if (angle < 1e-14) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, aa / angle).toRotationMatrix();
}

Vec3 normalize_axis_angle(const Vec3& aa) {
  double angle = aa.norm();
  if (angle <= M_PI) return aa;
  Vec3 axis = aa / angle;
  double wrapped = std::fmod(angle, 2.0 * M_PI);
  if (wrapped > M_PI) wrapped -= 2.0 * M_PI;  // in (-pi, pi]
  return axis * wrapped;
}

}  // namespace pf
