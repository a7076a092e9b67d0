#pragma once

#include <string>

#include "geometry.hpp"

namespace pf {

// Pinhole camera; extrinsic maps world to camera space (+z forward). Pixel
// rays pass through integer pixel coordinates, so projection yields
// continuous pixel coordinates directly comparable with image indices.
struct Camera {
  double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
  RigidTransform extrinsic;
  std::string id;

  void validate() const;

  Vec3 world_to_camera(const Vec3& p) const { return extrinsic.apply(p); }
  Vec3 origin() const { return extrinsic.inverse().translation; }

  // Continuous pixel coordinates plus camera-space depth; false behind camera.
  bool project(const Vec3& world, double& u, double& v, double& z) const;

  // Unit world-space direction of the ray through pixel (px, py).
  Vec3 pixel_ray_direction(double px, double py) const;

  static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fx, double fy,
                        int width, int height);
};

}  // namespace pf
