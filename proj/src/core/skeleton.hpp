#pragma once

#include <string>
#include <vector>

#include "capsule.hpp"
#include "geometry.hpp"

namespace pf {

struct Joint {
  std::string name;
  int parent = -1;  // -1: root; parents always precede children
  Vec3 offset = Vec3::Zero();
};

struct Bone {
  int joint = 0;
  double radius = 0.0;
  double length = 0.0;  // 0 makes a sphere
};

// Simplified articulated body: joint tree plus capsule bones. Each bone is
// rigidly attached to its joint; its rest axis points at the joint's first
// child, or continues the parent limb direction for leaf joints.
struct Skeleton {
  std::vector<Joint> joints;
  std::vector<Bone> bones;

  void validate() const;
  size_t joint_count() const { return joints.size(); }

  std::vector<Vec3> rest_joint_positions() const;
  // Unit rest axis direction per joint (first-child rule).
  std::vector<Vec3> rest_bone_directions() const;
  std::vector<Capsule> rest_capsules() const;
};

struct Pose {
  Vec3 root_translation = Vec3::Zero();
  Vec3 root_rotation = Vec3::Zero();          // axis-angle
  std::vector<Vec3> joint_rotations;          // axis-angle per joint

  static Pose rest(const Skeleton& s) {
    Pose p;
    p.joint_rotations.assign(s.joint_count(), Vec3::Zero());
    return p;
  }

  void validate(const Skeleton& s) const;
  // Wraps every axis-angle magnitude into [0, pi].
  Pose normalized() const;
};

// Per-joint rigid maps from world rest coordinates to world posed coordinates
// (the LBS skinning transforms).
std::vector<RigidTransform> skinning_transforms(const Skeleton& s, const Pose& pose);

std::vector<Capsule> posed_capsules(const Skeleton& s, const Pose& pose);
std::vector<Capsule> posed_capsules(const Skeleton& s,
                                    const std::vector<RigidTransform>& transforms);

// Fixed 16-joint humanoid in a relaxed A-pose, y-up, facing +z.
Skeleton default_skeleton();

}  // namespace pf
