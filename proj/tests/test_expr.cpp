#include <doctest.h>

#include <random>

#include "atlas/expr.hpp"
#include "atlas/map.hpp"

using namespace atlas;

TEST_SUITE_BEGIN("expr");

TEST_CASE("complex identity map") {
  PlaneMap m = PlaneMap::parse("z", ParseMode::ComplexZ);
  Jet2 j = m.jet({3, -4});
  CHECK(j.value.x == doctest::Approx(3).epsilon(1e-15));
  CHECK(j.value.y == doctest::Approx(-4).epsilon(1e-15));
  CHECK(j.jacobian.a == doctest::Approx(1));
  CHECK(j.jacobian.b == doctest::Approx(0));
  CHECK(j.jacobian.c == doctest::Approx(0));
  CHECK(j.jacobian.d == doctest::Approx(1));
  CHECK(j.hess_x.xx == 0);
  CHECK(j.hess_y.yy == 0);
}

TEST_CASE("z^2 jet at (1,0)") {
  // DF of z^2 is [[2x, -2y], [2y, 2x]]
  PlaneMap m = PlaneMap::parse("z^2", ParseMode::ComplexZ);
  Jet2 j = m.jet({1, 0});
  CHECK(j.jacobian.a == doctest::Approx(2).epsilon(1e-14));
  CHECK(j.jacobian.b == doctest::Approx(0).epsilon(1e-14));
  CHECK(j.jacobian.c == doctest::Approx(0).epsilon(1e-14));
  CHECK(j.jacobian.d == doctest::Approx(2).epsilon(1e-14));
  CHECK(j.det() == doctest::Approx(4).epsilon(1e-14));
}

TEST_CASE("complex-mode F0 matches its expanded real form") {
  PlaneMap zc = PlaneMap::parse("z^3 + 2.5*zbar^2 + z", ParseMode::ComplexZ);
  PlaneMap xy = PlaneMap::parse(
      "(x^3 - 3*x*y^2 + 2.5*x^2 - 2.5*y^2 + x, 3*x^2*y - y^3 - 5*x*y + y)", ParseMode::RealXY);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    Vec2 p{u(rng), u(rng)};
    Vec2 a = zc(p), b = xy(p);
    double scale = 1.0 + a.norm();
    CHECK(std::abs(a.x - b.x) / scale < 1e-12);
    CHECK(std::abs(a.y - b.y) / scale < 1e-12);
  }
}

TEST_CASE("builtins evaluate to the reference formulas") {
  PlaneMap f0 = PlaneMap::builtin(BuiltinTag::F0);
  Jet2 j0 = f0.jet({0, 0});
  CHECK(j0.value.x == 0);
  CHECK(j0.value.y == 0);
  // near the origin F0 is essentially the identity
  CHECK(j0.jacobian.a == doctest::Approx(1));
  CHECK(j0.jacobian.d == doctest::Approx(1));
  CHECK(j0.jacobian.b == doctest::Approx(0));
  CHECK(j0.jacobian.c == doctest::Approx(0));

  PlaneMap f2 = PlaneMap::builtin(BuiltinTag::F2);
  // det DF2 = x^2 + y^2 - 1 by hand differentiation
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 25; ++i) {
    Vec2 p{u(rng), u(rng)};
    CHECK(f2.jet(p).det() ==
          doctest::Approx(p.x * p.x + p.y * p.y - 1).epsilon(1e-12));
  }
  Jet2 j2 = f2.jet({0, 1});
  CHECK(j2.jacobian.a == doctest::Approx(1));
  CHECK(j2.jacobian.b == doctest::Approx(0).epsilon(1e-14));
  CHECK(j2.jacobian.c == doctest::Approx(0).epsilon(1e-14));
  CHECK(j2.jacobian.d == doctest::Approx(0).epsilon(1e-14));
  CHECK(j2.grad_det().x == doctest::Approx(0).epsilon(1e-14));
  CHECK(j2.grad_det().y == doctest::Approx(2).epsilon(1e-14));

  PlaneMap f3 = PlaneMap::builtin(BuiltinTag::F3);
  Vec2 v3 = f3({0, 0});
  CHECK(v3.x == doctest::Approx(0));
  CHECK(v3.y == doctest::Approx(20));
}

TEST_CASE("builtin hints: F0 n=3, F1 n=7, F3 n=2, F2 none") {
  CHECK(PlaneMap::builtin(BuiltinTag::F0).infinity_hint()->degree == 3);
  CHECK(PlaneMap::builtin(BuiltinTag::F1).infinity_hint()->degree == 7);
  CHECK(PlaneMap::builtin(BuiltinTag::F3).infinity_hint()->degree == 2);
  CHECK(!PlaneMap::builtin(BuiltinTag::F2).infinity_hint());
  CHECK_THROWS_AS(PlaneMap::builtin("F9"), Error);
}

TEST_CASE("hint inference for parsed complex polynomials") {
  // unique top monomial, pure power of z
  PlaneMap a = PlaneMap::parse("z^4 + zbar^2 + 1", ParseMode::ComplexZ);
  REQUIRE(a.infinity_hint());
  CHECK(a.infinity_hint()->degree == 4);

  // top term involves zbar: no hint
  PlaneMap b = PlaneMap::parse("z^2*zbar + z", ParseMode::ComplexZ);
  CHECK(!b.infinity_hint());

  // non-polynomial: no hint
  PlaneMap c = PlaneMap::parse("exp(z) + z", ParseMode::ComplexZ);
  CHECK(!c.infinity_hint());
}

TEST_CASE("symbolic derivatives match finite differences on all builtins") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (BuiltinTag tag : {BuiltinTag::F0, BuiltinTag::F1, BuiltinTag::F2, BuiltinTag::F3}) {
    PlaneMap m = PlaneMap::builtin(tag);
    for (int i = 0; i < 100; ++i) {
      Vec2 p{u(rng), u(rng)};
      Jet2 j = m.jet(p);

      const double h1 = 1e-5;
      Vec2 fxp = m({p.x + h1, p.y}), fxm = m({p.x - h1, p.y});
      Vec2 fyp = m({p.x, p.y + h1}), fym = m({p.x, p.y - h1});
      double fd[4] = {(fxp.x - fxm.x) / (2 * h1), (fyp.x - fym.x) / (2 * h1),
                      (fxp.y - fxm.y) / (2 * h1), (fyp.y - fym.y) / (2 * h1)};
      double sym[4] = {j.jacobian.a, j.jacobian.b, j.jacobian.c, j.jacobian.d};
      for (int k = 0; k < 4; ++k) {
        double tol = std::abs(sym[k]) < 1e-3 ? 1e-8 * (1.0 + std::abs(sym[k]))
                                             : 1e-6 * std::abs(sym[k]);
        tol = std::max(tol, 1e-6 * (1.0 + std::abs(fd[k])));
        CHECK(std::abs(sym[k] - fd[k]) < tol);
      }

      const double h2 = 1e-4;
      Vec2 c = m(p);
      Vec2 xp = m({p.x + h2, p.y}), xm = m({p.x - h2, p.y});
      Vec2 yp = m({p.x, p.y + h2}), ym = m({p.x, p.y - h2});
      Vec2 pp = m({p.x + h2, p.y + h2}), pm = m({p.x + h2, p.y - h2});
      Vec2 mp = m({p.x - h2, p.y + h2}), mm = m({p.x - h2, p.y - h2});
      double inv = 1.0 / (h2 * h2);
      double fdh[6] = {(xp.x - 2 * c.x + xm.x) * inv, (pp.x - pm.x - mp.x + mm.x) * inv / 4,
                       (yp.x - 2 * c.x + ym.x) * inv, (xp.y - 2 * c.y + xm.y) * inv,
                       (pp.y - pm.y - mp.y + mm.y) * inv / 4, (yp.y - 2 * c.y + ym.y) * inv};
      double symh[6] = {j.hess_x.xx, j.hess_x.xy, j.hess_x.yy,
                        j.hess_y.xx, j.hess_y.xy, j.hess_y.yy};
      for (int k = 0; k < 6; ++k) {
        double tol = std::max(1e-4 * std::abs(symh[k]), 1e-3 * (1.0 + 0.0));
        CHECK(std::abs(symh[k] - fdh[k]) < tol);
      }
    }
  }
}

TEST_CASE("parse -> pretty-print -> parse is a fixed point") {
  const char* sources_z[] = {"z^3 + 2.5*zbar^2 + z", "z^7 + zbar^4 + z",
                             "(z + zbar)^2/4 - z*zbar", "exp(z) - sin(zbar)"};
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const char* src : sources_z) {
    PlaneMap m1 = PlaneMap::parse(src, ParseMode::ComplexZ);
    std::string printed = m1.pretty_source();
    PlaneMap m2 = PlaneMap::parse(printed, ParseMode::ComplexZ);
    CHECK(m2.pretty_source() == printed);
    for (int i = 0; i < 40; ++i) {
      Vec2 p{u(rng), u(rng)};
      Vec2 a = m1(p), b = m2(p);
      CHECK(a.x == b.x);  // machine-exact: same tree, same evaluation
      CHECK(a.y == b.y);
    }
  }
  const char* sources_xy[] = {"(x, y^3/3 + (x^2 - 1)*y)",
                              "(x^2 - y^2 + 20*sin(x), 2*x*y + 20*cos(y))",
                              "(x/(1 + y^2), y - 0.125*x)"};
  for (const char* src : sources_xy) {
    PlaneMap m1 = PlaneMap::parse(src, ParseMode::RealXY);
    std::string printed = m1.pretty_source();
    PlaneMap m2 = PlaneMap::parse(printed, ParseMode::RealXY);
    CHECK(m2.pretty_source() == printed);
    for (int i = 0; i < 40; ++i) {
      Vec2 p{u(rng), u(rng)};
      CHECK(m1(p).x == m2(p).x);
      CHECK(m1(p).y == m2(p).y);
    }
  }
}

TEST_CASE("parse errors carry positions and categories") {
  CHECK_THROWS_AS(PlaneMap::parse("z +", ParseMode::ComplexZ), SyntaxError);
  CHECK_THROWS_AS(PlaneMap::parse("tan(z)", ParseMode::ComplexZ), SyntaxError);
  CHECK_THROWS_AS(PlaneMap::parse("z^2.5", ParseMode::ComplexZ), SyntaxError);
  CHECK_THROWS_AS(PlaneMap::parse("z^-1", ParseMode::ComplexZ), SyntaxError);
  CHECK_THROWS_AS(PlaneMap::parse("x + y", ParseMode::ComplexZ), SyntaxError);  // wrong vars
  CHECK_THROWS_AS(PlaneMap::parse("x + y", ParseMode::RealXY), SyntaxError);   // needs a pair

  try {
    PlaneMap::parse("z + tan(z)", ParseMode::ComplexZ);
    CHECK(false);
  } catch (const SyntaxError& e) {
    CHECK(e.position == 4);
    CHECK(std::string(e.what()).find("unsupported function") != std::string::npos);
  }
}

TEST_CASE("division evaluates as written and poles surface as errors") {
  PlaneMap m = PlaneMap::parse("(x/y, y)", ParseMode::RealXY);
  CHECK(m({1, 2}).x == doctest::Approx(0.5));
  CHECK_THROWS_AS(m.jet({1, 0}), Error);  // pole reported, not propagated
}

TEST_CASE("black-box maps use flagged finite-difference derivatives") {
  PlaneMap bb = PlaneMap::black_box(
      [](Vec2 p) { return Vec2{p.x * p.x - p.y, p.y * p.y + p.x}; }, "bb");
  CHECK(bb.uses_fd_derivatives());
  Jet2 j = bb.jet({1.0, 2.0});
  CHECK(j.jacobian.a == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(j.jacobian.b == doctest::Approx(-1.0).epsilon(1e-5));
  CHECK(j.hess_x.xx == doctest::Approx(2.0).epsilon(1e-2));
}

TEST_SUITE_END();
