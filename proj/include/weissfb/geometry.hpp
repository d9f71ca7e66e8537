#ifndef WEISSFB_GEOMETRY_HPP
#define WEISSFB_GEOMETRY_HPP

#include <cmath>

namespace wfb {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  Vec2 normalized() const {
    const double n = norm();
    return {x / n, y / n};
  }
  // 90-degree counterclockwise rotation.
  Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double positive_part(double t) { return t > 0.0 ? t : 0.0; }

inline Vec2 unit_from_angle(double theta) {
  return {std::cos(theta), std::sin(theta)};
}

}  // namespace wfb

#endif
