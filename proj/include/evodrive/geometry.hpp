#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace evodrive {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Wrap an angle into [-pi, pi).
inline double wrap_angle(double a) {
  double w = std::fmod(a + kPi, 2.0 * kPi);
  if (w < 0) w += 2.0 * kPi;
  return w - kPi;
}

inline double deg_to_rad(double d) { return d * kPi / 180.0; }

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

// Position plus heading; heading 0 points along +x.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // radians in [-pi, pi)

  Vec2 position() const { return {x, y}; }
  Pose normalized() const { return {x, y, wrap_angle(theta)}; }
};

// Axis-aligned rectangle, x0 <= x1 and y0 <= y1.
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  bool contains(Vec2 p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
  Vec2 closest_point(Vec2 p) const {
    return {std::clamp(p.x, x0, x1), std::clamp(p.y, y0, y1)};
  }
};

// Distance from a point to a rectangle; zero when the point is inside.
inline double point_rect_distance(Vec2 p, const Rect& r) {
  return distance(p, r.closest_point(p));
}

inline bool circle_intersects_rect(Vec2 center, double radius, const Rect& r) {
  return point_rect_distance(center, r) <= radius;
}

// Distance along a ray (origin, unit dir) to the first intersection with a
// rectangle, or +inf when the ray misses. Origin inside the rect gives 0.
inline double ray_rect_distance(Vec2 origin, Vec2 dir, const Rect& r) {
  double t_lo = 0.0;
  double t_hi = kInf;
  const double o[2] = {origin.x, origin.y};
  const double d[2] = {dir.x, dir.y};
  const double lo[2] = {r.x0, r.y0};
  const double hi[2] = {r.x1, r.y1};
  for (int axis = 0; axis < 2; ++axis) {
    if (std::abs(d[axis]) < 1e-12) {
      if (o[axis] < lo[axis] || o[axis] > hi[axis]) return kInf;
      continue;
    }
    double t1 = (lo[axis] - o[axis]) / d[axis];
    double t2 = (hi[axis] - o[axis]) / d[axis];
    if (t1 > t2) std::swap(t1, t2);
    t_lo = std::max(t_lo, t1);
    t_hi = std::min(t_hi, t2);
    if (t_lo > t_hi) return kInf;
  }
  return t_lo;
}

}  // namespace evodrive
