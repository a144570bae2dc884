#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <functional>

#include "atlas/critical.hpp"
#include "atlas/geometry.hpp"
#include "atlas/map.hpp"

using namespace atlas;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent oracle: accumulated argument of an analytically sampled
// tangent field, dense enough that each step is far below pi.
double tangent_turns_oracle(const std::function<Vec2(double)>& derivative, int n = 20000) {
  double total = 0.0;
  Vec2 prev = derivative(0.0);
  for (int i = 1; i <= n; ++i) {
    Vec2 cur = derivative(2.0 * kPi * i / n);
    total += std::atan2(cross(prev, cur), dot(prev, cur));
    prev = cur;
  }
  return total / (2.0 * kPi);
}

Polyline fourier_loop(std::mt19937& rng, int samples) {
  // star-shaped loops r(t) = 1 + sum a_k cos kt + b_k sin kt are always
  // simple and positively oriented
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double a[5], b[5], budget = 0.35;
  for (int k = 0; k < 5; ++k) {
    a[k] = u(rng) * budget / 5.0;
    b[k] = u(rng) * budget / 5.0;
  }
  std::vector<Vec2> pts;
  for (int i = 0; i < samples; ++i) {
    double t = 2.0 * kPi * i / samples;
    double r = 1.0;
    for (int k = 0; k < 5; ++k) r += a[k] * std::cos((k + 1) * t) + b[k] * std::sin((k + 1) * t);
    pts.push_back({r * std::cos(t), r * std::sin(t)});
  }
  return make_polyline(std::move(pts), true);
}

Polyline refine_double(const Polyline& c) {
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    pts.push_back(c.points[i]);
    pts.push_back((c.segment_a(i) + c.segment_b(i)) * 0.5);
  }
  return make_polyline(std::move(pts), true);
}

Polyline figure_eight(int n) {
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) {
    double t = 2.0 * kPi * i / n;
    pts.push_back({std::sin(2 * t), std::sin(t)});
  }
  return make_polyline(std::move(pts), true);
}

}  // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("angle_sweep basics") {
  std::vector<Vec2> full_turn{{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 0}};
  CHECK(angle_sweep(full_turn).total_angle == doctest::Approx(2 * kPi));

  std::vector<Vec2> constant{{1, 0}, {1, 0}, {1, 0}};
  CHECK(angle_sweep(constant).total_angle == doctest::Approx(0));

  std::vector<Vec2> half_negative{{1, 0}, {0, -1}, {-1, 0}};
  CHECK(angle_sweep(half_negative).total_angle == doctest::Approx(-kPi));

  std::vector<Vec2> with_zero{{1, 0}, {0, 0}, {-1, 0}};
  CHECK_THROWS_AS(angle_sweep(with_zero), Error);

  std::vector<Vec2> reversal{{1, 0}, {-1, 1e-13}};  // turn within the pi guard band
  CHECK_THROWS_AS(angle_sweep(reversal), Error);
}

TEST_CASE("winding numbers of squares and circles") {
  Polyline square = make_polyline({{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}, true);
  CHECK(winding_number(square, {0, 0}) == 1);
  CHECK(winding_number(square, {5, 5}) == 0);
  CHECK_THROWS_AS(winding_number(square, {1, 0}), Error);  // on the curve

  for (double rho : {0.5, 1.0, 7.0})
    CHECK(winding_number(sample_circle({0, 0}, rho, 64), {0, 0}) == 1);
}

TEST_CASE("image of the unit circle under F0 winds -2 around 0") {
  PlaneMap f0 = PlaneMap::builtin(BuiltinTag::F0);
  Polyline image = image_of_curve(f0, sample_circle({0, 0}, 1.0, 256));
  CHECK(winding_number(image, {0, 0}) == -2);
}

TEST_CASE("rotation numbers: circle, figure-eight, F0 regimes") {
  CHECK(rotation_number(sample_circle({0, 0}, 1.0, 64)) == 1);

  // oracle for the figure-eight: analytic tangent (2cos2t, cos t)
  double oracle = tangent_turns_oracle(
      [](double t) { return Vec2{2 * std::cos(2 * t), std::cos(t)}; });
  CHECK(std::abs(oracle - std::round(oracle)) < 1e-6);
  CHECK(static_cast<int>(std::llround(oracle)) == 0);
  CHECK(rotation_number(figure_eight(256)) == 0);

  PlaneMap f0 = PlaneMap::builtin(BuiltinTag::F0);
  CHECK(rotation_number(image_of_curve(f0, sample_circle({0, 0}, 0.1, 512))) == 1);
  CHECK(rotation_number(image_of_curve(f0, sample_circle({0, 0}, 10.0, 1024))) == 3);
}

TEST_CASE("self intersections") {
  Polyline convex = sample_circle({0, 0}, 2.0, 32);
  CHECK(self_intersections(convex).empty());

  auto hits = self_intersections(figure_eight(256));
  std::size_t genuine = 0;
  Vec2 where;
  for (const auto& h : hits)
    if (!h.degenerate) { ++genuine; where = h.point; }
  CHECK(genuine == 1);
  CHECK(where.norm() < 0.05);
}

TEST_CASE("offset circle radii") {
  Polyline circle = sample_circle({0, 0}, 1.0, 128);
  Polyline out = offset_curve(circle, 0.1, Side::Left);
  Polyline in = offset_curve(circle, 0.1, Side::Right);
  for (const Vec2& p : out.points) CHECK(std::abs(p.norm() - 1.1) < 1e-3);
  for (const Vec2& p : in.points) CHECK(std::abs(p.norm() - 0.9) < 1e-3);
  // too-large offsets must refuse rather than fold over
  CHECK_THROWS_AS(offset_curve(circle, 1.5, Side::Right), Error);
}

TEST_CASE("sample_circle basics") {
  Polyline c4 = sample_circle({0, 0}, 1.0, 4);
  REQUIRE(c4.points.size() == 4);
  CHECK(c4.points[0].x == doctest::Approx(1));
  CHECK(c4.points[1].y == doctest::Approx(1));
  CHECK(c4.points[2].x == doctest::Approx(-1));
  CHECK(c4.points[3].y == doctest::Approx(-1));
  CHECK(c4.closed);
  CHECK(c4.signed_area() > 0);
}

TEST_CASE("refinement stability and reversal on random smooth loops") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    Polyline c = fourier_loop(rng, 128);
    Polyline c2 = refine_double(c);

    Vec2 inside{0.01, -0.02};
    CHECK(winding_number(c, inside) == winding_number(c2, inside));
    CHECK(rotation_number(c) == rotation_number(c2));

    // Umlaufsatz for simple positively oriented loops
    bool simple = true;
    for (const auto& h : self_intersections(c))
      if (!h.degenerate) simple = false;
    REQUIRE(simple);
    CHECK(rotation_number(c) == 1);

    Polyline rev = c;
    rev.reverse();
    CHECK(winding_number(rev, inside) == -winding_number(c, inside));
    CHECK(rotation_number(rev) == -rotation_number(c));
  }
}

TEST_CASE("rotation refuses under-sampled input instead of guessing") {
  // 6-point circle: rotation needs at least 8 points
  CHECK_THROWS_AS(rotation_number(sample_circle({0, 0}, 1.0, 6)), Error);
  // cusped image curve: the secant field reverses at the cusp
  PlaneMap f2 = PlaneMap::builtin(BuiltinTag::F2);
  Polyline lip = image_of_curve(f2, sample_circle({0, 0}, 1.0, 512));
  CHECK_THROWS_AS(rotation_number(lip), Error);
}

TEST_SUITE_END();
