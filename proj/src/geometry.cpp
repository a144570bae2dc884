#include "atlas/geometry.hpp"

#include "atlas/expr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace atlas {

namespace {

constexpr double kMinSeparation = 1e-12;
constexpr double kMinVectorNorm = 1e-14;
constexpr double kMaxTurn = std::numbers::pi - 0.1;
constexpr double kIntegerSlack = 0.05;

double round_to_integer(double turns, const char* what) {
  double r = std::round(turns);
  if (std::abs(turns - r) >= kIntegerSlack)
    fail(Error::Kind::Geometry,
         std::string(what) + ": accumulated turns " + format_double(turns) +
             " is not within 0.05 of an integer (under-sampled input)");
  return r;
}

}  // namespace

double Polyline::length() const {
  double L = 0;
  for (std::size_t i = 0; i < segment_count(); ++i) L += distance(segment_a(i), segment_b(i));
  return L;
}

double Polyline::signed_area() const {
  double A = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    Vec2 a = points[i], b = points[(i + 1) % points.size()];
    A += cross(a, b);
  }
  return 0.5 * A;
}

Vec2 Polyline::centroid() const {
  Vec2 c{0, 0};
  for (const Vec2& p : points) c += p;
  return c / static_cast<double>(points.size());
}

void Polyline::reverse() { std::reverse(points.begin(), points.end()); }

Polyline make_polyline(std::vector<Vec2> pts, bool closed) {
  std::vector<Vec2> cleaned;
  cleaned.reserve(pts.size());
  for (const Vec2& p : pts) {
    if (!p.finite()) fail(Error::Kind::Precondition, "polyline point is not finite");
    if (cleaned.empty() || distance(cleaned.back(), p) > kMinSeparation) cleaned.push_back(p);
  }
  if (closed && cleaned.size() > 1 && distance(cleaned.front(), cleaned.back()) <= kMinSeparation)
    cleaned.pop_back();
  if (cleaned.size() < 2) fail(Error::Kind::Precondition, "polyline needs at least 2 distinct points");
  return Polyline{std::move(cleaned), closed};
}

SweepResult angle_sweep(std::span<const Vec2> vectors) {
  if (vectors.size() < 2) fail(Error::Kind::Precondition, "angle_sweep needs at least 2 vectors");
  double total = 0;
  for (std::size_t i = 0; i + 1 < vectors.size(); ++i) {
    Vec2 u = vectors[i], v = vectors[i + 1];
    if (u.norm() <= kMinVectorNorm || v.norm() <= kMinVectorNorm)
      fail(Error::Kind::Geometry, "angle_sweep: zero vector at index " + std::to_string(i));
    double ang = std::atan2(cross(u, v), dot(u, v));
    if (std::abs(ang) >= kMaxTurn)
      fail(Error::Kind::Geometry,
           "angle_sweep: turn of " + format_double(ang) + " rad at index " + std::to_string(i) +
               " exceeds the sampling guard (under-sampled)");
    total += ang;
  }
  return {total, total / (2.0 * std::numbers::pi)};
}

int winding_number(const Polyline& curve, Vec2 p) {
  if (!curve.closed) fail(Error::Kind::Precondition, "winding number needs a closed curve");
  if (distance_to_polyline(p, curve) <= 1e-9)
    fail(Error::Kind::Geometry, "winding number: point lies on the curve");
  std::vector<Vec2> vecs;
  vecs.reserve(curve.points.size() + 1);
  for (const Vec2& q : curve.points) vecs.push_back(q - p);
  vecs.push_back(curve.points.front() - p);
  SweepResult s = angle_sweep(vecs);
  return static_cast<int>(round_to_integer(s.turns, "winding_number"));
}

int rotation_number(const Polyline& curve) {
  if (!curve.closed) fail(Error::Kind::Precondition, "rotation number needs a closed curve");
  if (curve.points.size() < 8)
    fail(Error::Kind::Precondition, "rotation number needs at least 8 points");
  std::vector<Vec2> secants;
  secants.reserve(curve.points.size() + 1);
  for (std::size_t i = 0; i < curve.points.size(); ++i)
    secants.push_back(curve.segment_b(i) - curve.segment_a(i));
  secants.push_back(secants.front());
  SweepResult s = angle_sweep(secants);
  return static_cast<int>(round_to_integer(s.turns, "rotation_number"));
}

namespace {

// Proper intersection of segments [a1,a2] and [b1,b2].
struct SegHitLocal {
  bool hit = false;
  bool degenerate = false;
  double ta = 0, tb = 0;
  Vec2 point;
};

SegHitLocal segment_intersection(Vec2 a1, Vec2 a2, Vec2 b1, Vec2 b2) {
  SegHitLocal r;
  Vec2 da = a2 - a1, db = b2 - b1;
  double denom = cross(da, db);
  Vec2 ab = b1 - a1;
  double scale = std::max({da.norm(), db.norm(), 1e-300});
  if (std::abs(denom) < 1e-14 * scale * scale) {
    // near-parallel: flag overlaps that actually come close
    double d1 = std::abs(cross(da, ab)) / std::max(da.norm(), 1e-300);
    if (d1 < 1e-12) {
      double lo = dot(b1 - a1, da) / da.norm2(), hi = dot(b2 - a1, da) / da.norm2();
      if (std::max(lo, hi) >= 0 && std::min(lo, hi) <= 1) {
        r.hit = true;
        r.degenerate = true;
        r.ta = std::clamp(0.5 * (std::clamp(lo, 0.0, 1.0) + std::clamp(hi, 0.0, 1.0)), 0.0, 1.0);
        r.point = a1 + da * r.ta;
      }
    }
    return r;
  }
  double ta = cross(ab, db) / denom;
  double tb = cross(ab, da) / denom;
  // half-open parameter ranges: a transversal crossing exactly at a shared
  // vertex is counted once, for the segments starting there
  const double lo = -1e-12, hi = 1.0 - 1e-12;
  if (ta < lo || ta >= hi || tb < lo || tb >= hi) return r;
  r.hit = true;
  r.ta = std::max(ta, 0.0);
  r.tb = std::max(tb, 0.0);
  r.point = a1 + da * r.ta;
  return r;
}

}  // namespace

std::vector<CurveCrossing> self_intersections(const Polyline& curve) {
  std::vector<CurveCrossing> out;
  std::size_t n = curve.segment_count();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (curve.closed && i == 0 && j == n - 1) continue;  // wrap-adjacent
      auto h = segment_intersection(curve.segment_a(i), curve.segment_b(i), curve.segment_a(j),
                                    curve.segment_b(j));
      if (h.hit) out.push_back({h.point, static_cast<int>(i), static_cast<int>(j), h.degenerate});
    }
  }
  return out;
}

std::vector<SegmentHit> polyline_intersections(const Polyline& a, const Polyline& b) {
  std::vector<SegmentHit> out;
  for (std::size_t i = 0; i < a.segment_count(); ++i) {
    for (std::size_t j = 0; j < b.segment_count(); ++j) {
      auto h = segment_intersection(a.segment_a(i), a.segment_b(i), b.segment_a(j),
                                    b.segment_b(j));
      if (h.hit)
        out.push_back({h.point, static_cast<int>(i), static_cast<int>(j), h.ta, h.degenerate});
    }
  }
  return out;
}

double distance_to_polyline(Vec2 p, const Polyline& c) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.segment_count(); ++i) {
    Vec2 a = c.segment_a(i), b = c.segment_b(i);
    Vec2 ab = b - a;
    double t = ab.norm2() > 0 ? std::clamp(dot(p - a, ab) / ab.norm2(), 0.0, 1.0) : 0.0;
    best = std::min(best, distance(p, a + ab * t));
  }
  return best;
}

Polyline offset_curve(const Polyline& curve, double dist, Side side) {
  if (!curve.closed) fail(Error::Kind::Precondition, "offset_curve needs a closed curve");
  if (!(dist > 0)) fail(Error::Kind::Precondition, "offset distance must be positive");
  std::size_t n = curve.points.size();
  std::vector<Vec2> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 prev = curve.points[(i + n - 1) % n];
    Vec2 cur = curve.points[i];
    Vec2 next = curve.points[(i + 1) % n];
    Vec2 tin = normalized(cur - prev), tout = normalized(next - cur);
    Vec2 bis = tin + tout;
    Vec2 dir = bis.norm() > 1e-9 ? normalized(bis) : tout;
    // miter so the offset keeps distance `dist` from both adjacent segments
    double cos_half = std::sqrt(std::max(0.0, 0.5 * (1.0 + dot(tin, tout))));
    double scale = dist / std::max(cos_half, 0.2);
    out[i] = cur + side_normal(dir, side) * scale;
  }
  Polyline result = make_polyline(std::move(out), true);
  for (const auto& x : self_intersections(result)) {
    if (!x.degenerate)
      fail(Error::Kind::Geometry,
           "offset of distance " + format_double(dist) + " self-intersects (distance too large)");
  }
  if (curve.signed_area() * result.signed_area() <= 0)
    fail(Error::Kind::Geometry,
         "offset of distance " + format_double(dist) + " folds through the curve");
  return result;
}

Polyline sample_circle(Vec2 center, double radius, int n) {
  if (!(radius > 0)) fail(Error::Kind::Precondition, "circle radius must be positive");
  if (n < 3) fail(Error::Kind::Precondition, "circle needs at least 3 samples");
  std::vector<Vec2> pts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double t = 2.0 * std::numbers::pi * i / n;
    pts[static_cast<std::size_t>(i)] = {center.x + radius * std::cos(t),
                                        center.y + radius * std::sin(t)};
  }
  return make_polyline(std::move(pts), true);
}

bool point_in_polygon(Vec2 p, const Polyline& closed_curve) {
  return winding_number(closed_curve, p) != 0;
}

}  // namespace atlas
