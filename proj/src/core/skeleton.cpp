#include "skeleton.hpp"

#include <cmath>

#include "error.hpp"

namespace pf {

void Skeleton::validate() const {
  require(!joints.empty(), Status::InvalidArgument, "skeleton has no joints");
  require(joints[0].parent < 0, Status::InvalidArgument, "joint 0 must be the root");
  for (size_t j = 1; j < joints.size(); ++j) {
    require(joints[j].parent >= 0 && joints[j].parent < static_cast<int>(j),
            Status::InvalidArgument,
            "joint parents must precede their children (joint " + std::to_string(j) + ")");
  }
  for (const Bone& b : bones) {
    require(b.joint >= 0 && b.joint < static_cast<int>(joints.size()), Status::InvalidArgument,
            "bone joint index out of range");
    require(b.radius > 0.0, Status::InvalidArgument, "bone radius must be positive");
    require(b.length >= 0.0, Status::InvalidArgument, "bone length must be non-negative");
  }
}

std::vector<Vec3> Skeleton::rest_joint_positions() const {
  std::vector<Vec3> pos(joints.size());
  for (size_t j = 0; j < joints.size(); ++j) {
    pos[j] = joints[j].parent < 0 ? joints[j].offset : pos[joints[j].parent] + joints[j].offset;
  }
  return pos;
}

std::vector<Vec3> Skeleton::rest_bone_directions() const {
  std::vector<Vec3> dir(joints.size(), Vec3(0, 0, 1));
  std::vector<int> first_child(joints.size(), -1);
  for (size_t j = joints.size(); j-- > 1;) {
    first_child[joints[j].parent] = static_cast<int>(j);
  }
  for (size_t j = 0; j < joints.size(); ++j) {
    Vec3 d;
    if (first_child[j] >= 0) {
      d = joints[first_child[j]].offset;
    } else if (joints[j].parent >= 0) {
      d = joints[j].offset;  // leaf: continue the limb
    } else {
      d = Vec3(0, 0, 1);
    }
    double n = d.norm();
    dir[j] = n > 1e-12 ? Vec3(d / n) : Vec3(0, 0, 1);
  }
  return dir;
}

std::vector<Capsule> Skeleton::rest_capsules() const {
  std::vector<Vec3> pos = rest_joint_positions();
  std::vector<Vec3> dir = rest_bone_directions();
  std::vector<Capsule> caps;
  caps.reserve(bones.size());
  for (const Bone& b : bones) {
    Capsule c;
    c.a = pos[b.joint];
    c.b = c.a + b.length * dir[b.joint];
    c.radius = b.radius;
    caps.push_back(c);
  }
  return caps;
}

void Pose::validate(const Skeleton& s) const {
  require(joint_rotations.size() == s.joint_count(), Status::InvalidArgument,
          "pose joint count does not match skeleton");
  auto finite = [](const Vec3& v) { return v.allFinite(); };
  require(finite(root_translation) && finite(root_rotation), Status::InvalidArgument,
          "pose root transform has non-finite components");
  for (const Vec3& r : joint_rotations)
    require(finite(r), Status::InvalidArgument, "pose rotation has non-finite components");
}

Pose Pose::normalized() const {
  Pose out = *this;
  out.root_rotation = normalize_axis_angle(out.root_rotation);
  for (Vec3& r : out.joint_rotations) r = normalize_axis_angle(r);
  return out;
}

std::vector<RigidTransform> skinning_transforms(const Skeleton& s, const Pose& pose) {
  pose.validate(s);
  std::vector<Vec3> rest = s.rest_joint_positions();
  std::vector<RigidTransform> out(s.joint_count());
  std::vector<Mat3> world_rot(s.joint_count());

  for (size_t j = 0; j < s.joint_count(); ++j) {
    Mat3 local = axis_angle_to_matrix(pose.joint_rotations[j]);
    if (s.joints[j].parent < 0) {
      Mat3 rot = axis_angle_to_matrix(pose.root_rotation) * local;
      world_rot[j] = rot;
      out[j] = RigidTransform::rotate_about(rot, rest[j]);
      out[j].translation += pose.root_translation;
    } else {
      const RigidTransform& parent = out[s.joints[j].parent];
      Vec3 posed_joint = parent.apply(rest[j]);
      world_rot[j] = world_rot[s.joints[j].parent] * local;
      out[j] = RigidTransform::rotate_about(world_rot[j], rest[j]);
      out[j].translation += posed_joint - rest[j];
    }
  }
  return out;
}

std::vector<Capsule> posed_capsules(const Skeleton& s,
                                    const std::vector<RigidTransform>& transforms) {
  std::vector<Capsule> caps = s.rest_capsules();
  for (size_t i = 0; i < caps.size(); ++i) {
    const RigidTransform& t = transforms[s.bones[i].joint];
    caps[i].a = t.apply(caps[i].a);
    caps[i].b = t.apply(caps[i].b);
  }
  return caps;
}

std::vector<Capsule> posed_capsules(const Skeleton& s, const Pose& pose) {
  return posed_capsules(s, skinning_transforms(s, pose));
}

Skeleton default_skeleton() {
  Skeleton s;
  auto J = [&](const char* name, int parent, double x, double y, double z) {
    s.joints.push_back({name, parent, Vec3(x, y, z)});
  };
  // 0-based indices noted for the bone table below.
  J("pelvis", -1, 0.00, 0.95, 0.0);     // 0
  J("spine", 0, 0.00, 0.25, 0.0);       // 1
  J("neck", 1, 0.00, 0.30, 0.0);        // 2
  J("head", 2, 0.00, 0.13, 0.0);        // 3
  J("l_shoulder", 1, 0.13, 0.22, 0.0);  // 4
  J("l_elbow", 4, 0.23, -0.19, 0.0);    // 5
  J("l_wrist", 5, 0.20, -0.17, 0.0);    // 6
  J("r_shoulder", 1, -0.13, 0.22, 0.0); // 7
  J("r_elbow", 7, -0.23, -0.19, 0.0);   // 8
  J("r_wrist", 8, -0.20, -0.17, 0.0);   // 9
  J("l_hip", 0, 0.115, -0.06, 0.0);     // 10
  J("l_knee", 10, 0.03, -0.41, 0.0);    // 11
  J("l_ankle", 11, 0.01, -0.40, 0.0);   // 12
  J("r_hip", 0, -0.115, -0.06, 0.0);    // 13
  J("r_knee", 13, -0.03, -0.41, 0.0);   // 14
  J("r_ankle", 14, -0.01, -0.40, 0.0);  // 15

  auto B = [&](int joint, double radius, double length) {
    s.bones.push_back({joint, radius, length});
  };
  B(0, 0.110, 0.25);    // lower torso
  B(1, 0.120, 0.30);    // upper torso
  B(2, 0.055, 0.13);    // neck
  B(3, 0.100, 0.04);    // head
  B(4, 0.055, 0.2983);  // l upper arm
  B(5, 0.045, 0.2625);  // l forearm
  B(6, 0.045, 0.10);    // l hand
  B(7, 0.055, 0.2983);
  B(8, 0.045, 0.2625);
  B(9, 0.045, 0.10);
  B(10, 0.075, 0.4111); // l thigh
  B(11, 0.060, 0.4001); // l shin
  B(12, 0.048, 0.05);   // l foot
  B(13, 0.075, 0.4111);
  B(14, 0.060, 0.4001);
  B(15, 0.048, 0.05);

  s.validate();
  return s;
}

}  // namespace pf
