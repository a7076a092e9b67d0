#include "camera.hpp"

#include "error.hpp"

namespace pf {

void Camera::validate() const {
  require(fx > 0.0 && fy > 0.0, Status::InvalidArgument, "camera focal lengths must be positive");
  require(width >= 1 && height >= 1, Status::InvalidArgument, "camera resolution must be >= 1");
}

bool Camera::project(const Vec3& world, double& u, double& v, double& z) const {
  Vec3 c = world_to_camera(world);
  z = c.z();
  if (z <= 0.0) return false;
  u = fx * c.x() / z + cx;
  v = fy * c.y() / z + cy;
  return true;
}

Vec3 Camera::pixel_ray_direction(double px, double py) const {
  Vec3 dir_cam((px - cx) / fx, (py - cy) / fy, 1.0);
  return (extrinsic.rotation.transpose() * dir_cam).normalized();
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fx, double fy,
                       int width, int height) {
  Camera cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.width = width;
  cam.height = height;
  Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up).normalized();
  Vec3 down = forward.cross(right);
  Mat3 rot;  // rows: camera axes in world coordinates (x right, y down, z forward)
  rot.row(0) = right;
  rot.row(1) = down;
  rot.row(2) = forward;
  cam.extrinsic.rotation = rot;
  cam.extrinsic.translation = -(rot * eye);
  cam.validate();
  return cam;
}

}  // namespace pf
