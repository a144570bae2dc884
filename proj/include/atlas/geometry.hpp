#pragma once

#include <span>
#include <vector>

#include "atlas/geom2.hpp"

namespace atlas {

// Ordered vertex chain. For closed curves the first point is not repeated;
// closure is implicit. Construction drops consecutive duplicates closer
// than 1e-12.
struct Polyline {
  std::vector<Vec2> points;
  bool closed = false;

  std::size_t size() const { return points.size(); }
  // Number of segments, including the wrap-around one when closed.
  std::size_t segment_count() const {
    return closed ? points.size() : (points.empty() ? 0 : points.size() - 1);
  }
  Vec2 segment_a(std::size_t i) const { return points[i]; }
  Vec2 segment_b(std::size_t i) const { return points[(i + 1) % points.size()]; }

  double length() const;
  double signed_area() const;  // shoelace; closed curves only
  Vec2 centroid() const;
  void reverse();
};

Polyline make_polyline(std::vector<Vec2> pts, bool closed);

struct SweepResult {
  double total_angle = 0.0;  // radians
  double turns = 0.0;        // total_angle / 2*pi
};

// Accumulated signed angle along a sequence of nonzero vectors. Throws
// Geometry errors on zero vectors or when a consecutive pair turns by
// pi - 0.1 or more (under-sampled; caller must refine).
SweepResult angle_sweep(std::span<const Vec2> vectors);

// Winding number of a closed curve around p. Refuses points on the curve
// and under-sampled inputs rather than returning a wrong integer.
int winding_number(const Polyline& curve, Vec2 p);

// Winding number of the secant sequence around the origin.
int rotation_number(const Polyline& curve);

struct CurveCrossing {
  Vec2 point;
  int seg_a = 0;
  int seg_b = 0;
  bool degenerate = false;  // near-parallel overlap or endpoint touch
};

// All transversal self-crossings of non-adjacent segments, each reported once.
std::vector<CurveCrossing> self_intersections(const Polyline& curve);

// Transversal crossings between two polylines (parameters along segments of a).
struct SegmentHit {
  Vec2 point;
  int seg_a = 0;      // segment of the first polyline
  int seg_b = 0;      // segment of the second polyline
  double ta = 0.0;    // parameter on segment of a in [0,1]
  bool degenerate = false;
};
std::vector<SegmentHit> polyline_intersections(const Polyline& a, const Polyline& b);

// Distance from a point to a polyline.
double distance_to_polyline(Vec2 p, const Polyline& c);

// Displaces a closed curve along per-vertex normals. For a positively
// oriented curve, Side::Left lies outside it. Throws when the offset
// self-intersects (distance too large for the curve's feature size).
Polyline offset_curve(const Polyline& curve, double dist, Side side);

// n equally spaced points, counterclockwise, closed.
Polyline sample_circle(Vec2 center, double radius, int n);

bool point_in_polygon(Vec2 p, const Polyline& closed_curve);

}  // namespace atlas
