#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace pf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Rotation matrix from an axis-angle 3-vector (axis * angle, radians).
Mat3 axis_angle_to_matrix(const Vec3& aa);

// Equivalent axis-angle with magnitude in [0, pi]; angles above pi flip the
// axis so the component-wise pose metric stays stable.
Vec3 normalize_axis_angle(const Vec3& aa);

// Rigid transform x -> R*x + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 rotate(const Vec3& v) const { return rotation * v; }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }

  // this ∘ other (apply `other` first).
  RigidTransform compose(const RigidTransform& other) const {
    RigidTransform out;
    out.rotation = rotation * other.rotation;
    out.translation = rotation * other.translation + translation;
    return out;
  }

  static RigidTransform translate(const Vec3& t) {
    RigidTransform out;
    out.translation = t;
    return out;
  }

  static RigidTransform rotate_about(const Mat3& rot, const Vec3& center) {
    RigidTransform out;
    out.rotation = rot;
    out.translation = center - rot * center;
    return out;
  }
};

// General affine map; linear blends of rigid transforms land here.
struct AffineTransform {
  Mat3 linear = Mat3::Zero();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return linear * p + translation; }

  void accumulate(const RigidTransform& rt, double w) {
    linear += w * rt.rotation;
    translation += w * rt.translation;
  }

  AffineTransform inverse() const {
    AffineTransform inv;
    inv.linear = linear.inverse();
    inv.translation = -(inv.linear * translation);
    return inv;
  }
};

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 hi = Vec3::Constant(std::numeric_limits<double>::lowest());

  void expand(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void pad(double m) {
    lo.array() -= m;
    hi.array() += m;
  }
  bool contains(const Aabb& inner) const {
    return (inner.lo.array() >= lo.array()).all() && (inner.hi.array() <= hi.array()).all();
  }
  bool empty() const { return (hi.array() < lo.array()).any(); }
};

}  // namespace pf
