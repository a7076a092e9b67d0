#pragma once

#include <optional>
#include <vector>

#include "geometry.hpp"
#include "rng.hpp"

namespace pf {

// Capsule: all points within `radius` of segment [a, b]. Length 0 is a sphere.
struct Capsule {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;

  Vec3 closest_axis_point(const Vec3& p) const;
  double sdf(const Vec3& p) const;  // negative inside
  Aabb bounds() const;
};

// Signed distance to the union (min over capsules; negative inside).
double capsule_union_sdf(const std::vector<Capsule>& caps, const Vec3& p);

// Nearest hit parameter t >= 0 along unit ray ro + t*rd, or nullopt on miss.
std::optional<double> ray_capsule(const Vec3& ro, const Vec3& rd, const Capsule& c);

Aabb capsule_union_bounds(const std::vector<Capsule>& caps);

// Uniform samples on the boundary of the union: per-capsule area-weighted
// surface sampling with rejection of points buried inside other capsules.
std::vector<Vec3> sample_capsule_union_surface(const std::vector<Capsule>& caps, size_t count,
                                               uint64_t seed);

}  // namespace pf
