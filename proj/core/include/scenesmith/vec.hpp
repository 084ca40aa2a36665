#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <limits>

namespace scenesmith {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Centralized tolerances shared by geometry, placement and tests.
namespace tol {
inline constexpr double kSurfaceEps = 1e-7;  // minimum accepted ray t
inline constexpr double kHitDedup = 1e-9;    // crossings closer than this are one crossing
inline constexpr double kTest = 1e-6;
}  // namespace tol

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  static Aabb from_center_extents(const Vec3& center, const Vec3& extents) {
    return {center - extents / 2.0, center + extents / 2.0};
  }
  // Bottom-center origin convention used for placements.
  static Aabb from_base(const Vec3& base_center, const Vec3& extents) {
    Vec3 lo(base_center.x() - extents.x() / 2, base_center.y() - extents.y() / 2, base_center.z());
    return {lo, lo + extents};
  }

  bool empty() const { return (min.array() > max.array()).any(); }
  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void expand(const Aabb& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  Vec3 center() const { return (min + max) / 2.0; }
  Vec3 size() const { return max - min; }
  Vec3 base_center() const { return {(min.x() + max.x()) / 2, (min.y() + max.y()) / 2, min.z()}; }
  int longest_axis() const {
    Vec3 s = size();
    int axis = 0;
    if (s.y() > s[axis]) axis = 1;
    if (s.z() > s[axis]) axis = 2;
    return axis;
  }
  bool contains(const Aabb& o, double eps = 0.0) const {
    return (o.min.array() >= min.array() - eps).all() && (o.max.array() <= max.array() + eps).all();
  }
  // Strict interior overlap; touching faces do not count.
  bool overlaps(const Aabb& o, double eps = 0.0) const {
    return (min.array() < o.max.array() - eps).all() && (o.min.array() < max.array() - eps).all();
  }
  double distance_sq(const Vec3& p) const {
    Vec3 d = (min - p).cwiseMax(p - max).cwiseMax(Vec3::Zero());
    return d.squaredNorm();
  }
};

// Wire helpers. Actions use {"x":..,"y":..,"z":..}; snapshots and documents use [x,y,z].
inline nlohmann::json vec_to_object(const Vec3& v) { return {{"x", v.x()}, {"y", v.y()}, {"z", v.z()}}; }
inline nlohmann::json vec_to_array(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }
Vec3 vec_from_array(const nlohmann::json& j);  // throws std::invalid_argument

}  // namespace scenesmith
