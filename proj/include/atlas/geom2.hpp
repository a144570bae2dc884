#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace atlas {

// Error taxonomy shared by all modules. The kind is part of the contract:
// callers dispatch on it (e.g. rerouting on Reroute, refusal on UnderSampled).
class Error : public std::runtime_error {
 public:
  enum class Kind {
    Parse,         // expression syntax / unsupported function / bad exponent
    Eval,          // non-finite values, poles
    Numeric,       // non-convergence, singular Jacobian, step underflow
    Geometry,      // zero vectors, under-sampled turns, point on curve
    Precondition,  // caller violated a documented precondition
    Reroute,       // crossing too close to cusp image / double point / tangency
    Io,
  };

  Error(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

[[noreturn]] inline void fail(Error::Kind kind, const std::string& msg) {
  throw Error(kind, msg);
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }

  double norm2() const { return x * x + y * y; }
  double norm() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

// Counterclockwise quarter turn.
inline Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

inline Vec2 normalized(Vec2 v) {
  double n = v.norm();
  if (n == 0.0) fail(Error::Kind::Geometry, "cannot normalize zero vector");
  return v / n;
}

// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  double det() const { return a * d - b * c; }
  Vec2 apply(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  Mat2 adjugate() const { return {d, -b, -c, a}; }
  double max_abs() const {
    return std::max(std::max(std::abs(a), std::abs(b)), std::max(std::abs(c), std::abs(d)));
  }

  // Solve M v = rhs. Throws Numeric on a singular matrix relative to scale.
  Vec2 solve(Vec2 rhs) const {
    double dt = det();
    double scale = 1.0 + std::abs(a * d) + std::abs(b * c);
    if (std::abs(dt) < 1e-14 * scale)
      fail(Error::Kind::Numeric, "singular 2x2 system");
    return {(d * rhs.x - b * rhs.y) / dt, (a * rhs.y - c * rhs.x) / dt};
  }

  bool finite() const {
    return std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d);
  }
};

// Symmetric 2x2 matrix; holds the second partials of one map component.
struct Sym2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;

  // v^T S v
  double quad(Vec2 v) const { return xx * v.x * v.x + 2.0 * xy * v.x * v.y + yy * v.y * v.y; }
  Vec2 apply(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
  bool finite() const { return std::isfinite(xx) && std::isfinite(xy) && std::isfinite(yy); }
};

// Axis-aligned analysis window.
struct Rect {
  double x0 = -1.0, y0 = -1.0, x1 = 1.0, y1 = 1.0;

  Rect() = default;
  Rect(double x0_, double y0_, double x1_, double y1_) : x0(x0_), y0(y0_), x1(x1_), y1(y1_) {}

  bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double max_dim() const { return std::max(width(), height()); }
  Vec2 center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  Rect expanded(double margin) const { return {x0 - margin, y0 - margin, x1 + margin, y1 + margin}; }
};

// Side relative to travel direction along an oriented curve. For a
// positively oriented (counterclockwise) closed curve, Left is the
// unbounded side: offsets to the left move outward.
enum class Side { Left, Right };

inline Vec2 side_normal(Vec2 tangent, Side side) {
  Vec2 n{tangent.y, -tangent.x};  // left of travel, outward for CCW curves
  return side == Side::Left ? n : -n;
}

inline const char* side_name(Side s) { return s == Side::Left ? "left" : "right"; }

}  // namespace atlas
