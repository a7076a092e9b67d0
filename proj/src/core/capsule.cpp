#include "capsule.hpp"

#include <algorithm>
#include <cmath>

namespace pf {

Vec3 Capsule::closest_axis_point(const Vec3& p) const {
  Vec3 ab = b - a;
  double len2 = ab.squaredNorm();
  if (len2 < 1e-20) return a;
  double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

double Capsule::sdf(const Vec3& p) const { return (p - closest_axis_point(p)).norm() - radius; }

Aabb Capsule::bounds() const {
  Aabb box;
  box.expand(a);
  box.expand(b);
  box.pad(radius);
  return box;
}

double capsule_union_sdf(const std::vector<Capsule>& caps, const Vec3& p) {
  double d = std::numeric_limits<double>::max();
  for (const Capsule& c : caps) d = std::min(d, c.sdf(p));
  return d;
}

namespace {

std::optional<double> ray_sphere(const Vec3& ro, const Vec3& rd, const Vec3& center, double r) {
  Vec3 oc = ro - center;
  double b = rd.dot(oc);
  double c = oc.squaredNorm() - r * r;
  double h = b * b - c;
  if (h < 0.0) return std::nullopt;
  double sh = std::sqrt(h);
  double t = -b - sh;
  if (t >= 0.0) return t;
  t = -b + sh;
  if (t >= 0.0) return t;
  return std::nullopt;
}

}  // namespace

std::optional<double> ray_capsule(const Vec3& ro, const Vec3& rd, const Capsule& c) {
  Vec3 ba = c.b - c.a;
  double baba = ba.squaredNorm();
  if (baba < 1e-20) return ray_sphere(ro, rd, c.a, c.radius);

  std::optional<double> best;
  auto consider = [&](std::optional<double> t) {
    if (t && (!best || *t < *best)) best = t;
  };

  // Infinite cylinder, restricted to the segment span.
  Vec3 oa = ro - c.a;
  double bard = ba.dot(rd);
  double baoa = ba.dot(oa);
  double qa = baba - bard * bard;
  double qb = baba * rd.dot(oa) - baoa * bard;
  double qc = baba * oa.squaredNorm() - baoa * baoa - c.radius * c.radius * baba;
  if (std::abs(qa) > 1e-20) {
    double h = qb * qb - qa * qc;
    if (h >= 0.0) {
      double sh = std::sqrt(h);
      for (double t : {(-qb - sh) / qa, (-qb + sh) / qa}) {
        if (t < 0.0) continue;
        double y = baoa + t * bard;
        if (y >= 0.0 && y <= baba) consider(t);
      }
    }
  }
  consider(ray_sphere(ro, rd, c.a, c.radius));
  consider(ray_sphere(ro, rd, c.b, c.radius));
  return best;
}

Aabb capsule_union_bounds(const std::vector<Capsule>& caps) {
  Aabb box;
  for (const Capsule& c : caps) {
    box.expand(c.a);
    box.expand(c.b);
  }
  double rmax = 0.0;
  for (const Capsule& c : caps) rmax = std::max(rmax, c.radius);
  box.pad(rmax);
  return box;
}

std::vector<Vec3> sample_capsule_union_surface(const std::vector<Capsule>& caps, size_t count,
                                               uint64_t seed) {
  std::vector<double> area(caps.size());
  double total = 0.0;
  for (size_t i = 0; i < caps.size(); ++i) {
    const Capsule& c = caps[i];
    double len = (c.b - c.a).norm();
    area[i] = 2.0 * M_PI * c.radius * len + 4.0 * M_PI * c.radius * c.radius;
    total += area[i];
  }

  Rng rng(seed);
  std::vector<Vec3> out;
  out.reserve(count);
  size_t attempts = 0;
  const size_t max_attempts = count * 40 + 1000;
  while (out.size() < count && attempts++ < max_attempts) {
    // Pick a capsule by area.
    double pick = rng.next_double() * total;
    size_t ci = 0;
    while (ci + 1 < caps.size() && pick > area[ci]) {
      pick -= area[ci];
      ++ci;
    }
    const Capsule& c = caps[ci];
    Vec3 axis = c.b - c.a;
    double len = axis.norm();
    Vec3 u = len > 1e-12 ? Vec3(axis / len) : Vec3(0, 0, 1);
    // Orthonormal frame around u.
    Vec3 e1 = std::abs(u.x()) < 0.9 ? u.cross(Vec3(1, 0, 0)).normalized()
                                    : u.cross(Vec3(0, 1, 0)).normalized();
    Vec3 e2 = u.cross(e1);

    double cyl_area = 2.0 * M_PI * c.radius * len;
    Vec3 p;
    if (rng.next_double() * area[ci] < cyl_area) {
      double z = rng.next_double() * len;
      double phi = rng.next_double() * 2.0 * M_PI;
      p = c.a + z * u + c.radius * (std::cos(phi) * e1 + std::sin(phi) * e2);
    } else {
      // Hemisphere at one end, oriented away from the segment.
      bool at_b = rng.next_double() < 0.5;
      Vec3 center = at_b ? c.b : c.a;
      Vec3 n = at_b ? u : Vec3(-u);
      double cz = rng.next_double();  // cos(theta) uniform on a hemisphere
      double sz = std::sqrt(std::max(0.0, 1.0 - cz * cz));
      double phi = rng.next_double() * 2.0 * M_PI;
      Vec3 dir = cz * n + sz * (std::cos(phi) * e1 + std::sin(phi) * e2);
      p = center + c.radius * dir;
    }
    // Keep only points on the union boundary.
    bool buried = false;
    for (size_t k = 0; k < caps.size() && !buried; ++k) {
      if (k == ci) continue;
      if (caps[k].sdf(p) < -1e-9) buried = true;
    }
    if (!buried) out.push_back(p);
  }
  return out;
}

}  // namespace pf
