#pragma once

#include <cmath>
#include <cstdint>

namespace trajnav::env {

using NodeId = std::int32_t;

// Reserved id for the stop action; never a real node.
inline constexpr NodeId kStop = -1;

inline constexpr double kPi = 3.14159265358979323846;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const Vec3&) const = default;
};

inline double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

// Maps an angle into [-pi, pi).
inline double wrap_angle(double a) {
  const double r = a - 2.0 * kPi * std::floor((a + kPi) / (2.0 * kPi));
  return r >= kPi ? r - 2.0 * kPi : r;
}

// World heading of the horizontal displacement from -> to (0 along +x,
// counter-clockwise positive).
inline double bearing(const Vec3& from, const Vec3& to) {
  return std::atan2(to.y - from.y, to.x - from.x);
}

inline double elevation(const Vec3& from, const Vec3& to) {
  const double horizontal = std::hypot(to.x - from.x, to.y - from.y);
  return std::atan2(to.z - from.z, horizontal);
}

}  // namespace trajnav::env
