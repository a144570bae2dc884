#include "atlas/map.hpp"

#include <array>
#include <cmath>

namespace atlas {

namespace {

constexpr double kHintProbeRadius = 1e6;
constexpr double kHintRatioTol = 1e-3;

std::complex<double> cpow_int(std::complex<double> z, int n) {
  std::complex<double> r{1.0, 0.0};
  while (n > 0) r *= z, --n;
  return r;
}

}  // namespace

const char* builtin_name(BuiltinTag tag) {
  switch (tag) {
    case BuiltinTag::F0: return "F0";
    case BuiltinTag::F1: return "F1";
    case BuiltinTag::F2: return "F2";
    case BuiltinTag::F3: return "F3";
  }
  return "?";
}

PlaneMap PlaneMap::from_parsed(ParsedSource parsed, std::string name, std::string source_text,
                               std::optional<InfinityHint> hint, bool infer_hint) {
  PlaneMap m;
  m.name_ = std::move(name);
  m.source_ = std::move(source_text);
  m.mode_ = parsed.mode;
  m.syntax_ = parsed.syntax;

  DiffContext d;
  Ex fx = parsed.fx, fy = parsed.fy;
  Ex fx_x = d.d_dx(fx), fx_y = d.d_dy(fx);
  Ex fy_x = d.d_dx(fy), fy_y = d.d_dy(fy);
  Ex fx_xx = d.d_dx(fx_x), fx_xy = d.d_dy(fx_x), fx_yy = d.d_dy(fx_y);
  Ex fy_xx = d.d_dx(fy_x), fy_xy = d.d_dy(fy_x), fy_yy = d.d_dy(fy_y);

  std::array<Ex, 2> value{fx, fy};
  std::array<Ex, 6> fdf{fx, fy, fx_x, fx_y, fy_x, fy_y};
  std::array<Ex, 12> jet{fx, fy, fx_x, fx_y, fy_x, fy_y,
                         fx_xx, fx_xy, fx_yy, fy_xx, fy_xy, fy_yy};
  m.prog_value_ = std::make_shared<Program>(Program::compile(value));
  m.prog_fdf_ = std::make_shared<Program>(Program::compile(fdf));
  m.prog_jet_ = std::make_shared<Program>(Program::compile(jet));

  if (hint) {
    m.hint_ = hint;
  } else if (infer_hint && parsed.mode == ParseMode::ComplexZ) {
    // A hint is inferred only when the source is a complex polynomial whose
    // top total-degree monomial is unique and a pure power of z.
    if (auto poly = complex_polynomial(parsed.syntax); poly && !poly->empty()) {
      const auto& top = (*poly)[0];
      int top_total = top.z_deg + top.zbar_deg;
      bool unique_top = poly->size() < 2 ||
                        ((*poly)[1].z_deg + (*poly)[1].zbar_deg) < top_total;
      if (unique_top && top.zbar_deg == 0 && top.z_deg >= 1)
        m.hint_ = InfinityHint{top.z_deg, top.coeff};
    }
  }
  m.validate_hint();
  return m;
}

void PlaneMap::validate_hint() {
  if (!hint_) return;
  // |F(z) - c z^n| / |z|^n must be small far out along several rays.
  const double angles[] = {0.3, 1.7, 2.9, 4.1, 5.3};
  for (double th : angles) {
    std::complex<double> z = std::polar(kHintProbeRadius, th);
    Vec2 f = (*this)({z.real(), z.imag()});
    std::complex<double> lead = hint_->coefficient * cpow_int(z, hint_->degree);
    double rn = std::pow(kHintProbeRadius, hint_->degree);
    double ratio = std::hypot(f.x - lead.real(), f.y - lead.imag()) / rn;
    if (!(ratio < kHintRatioTol))
      fail(Error::Kind::Precondition,
           "infinity hint for map '" + name_ + "' fails the numeric dominance check");
  }
}

PlaneMap PlaneMap::parse(const std::string& source, ParseMode mode, std::string name) {
  ParsedSource parsed = parse_map_source(source, mode);
  if (name.empty()) name = "expr";
  return from_parsed(std::move(parsed), std::move(name), source, std::nullopt, true);
}

PlaneMap PlaneMap::builtin(BuiltinTag tag) {
  switch (tag) {
    case BuiltinTag::F0:
      return from_parsed(parse_map_source("z^3 + 2.5*zbar^2 + z", ParseMode::ComplexZ), "F0",
                         "z^3 + 2.5*zbar^2 + z", InfinityHint{3, {1.0, 0.0}}, false);
    case BuiltinTag::F1:
      return from_parsed(parse_map_source("z^7 + zbar^4 + z", ParseMode::ComplexZ), "F1",
                         "z^7 + zbar^4 + z", InfinityHint{7, {1.0, 0.0}}, false);
    case BuiltinTag::F2:
      return from_parsed(parse_map_source("(x, y^3/3 + (x^2 - 1)*y)", ParseMode::RealXY), "F2",
                         "(x, y^3/3 + (x^2 - 1)*y)", std::nullopt, false);
    case BuiltinTag::F3:
      return from_parsed(
          parse_map_source("(x^2 - y^2 + 20*sin(x), 2*x*y + 20*cos(y))", ParseMode::RealXY), "F3",
          "(x^2 - y^2 + 20*sin(x), 2*x*y + 20*cos(y))", InfinityHint{2, {1.0, 0.0}}, false);
  }
  fail(Error::Kind::Precondition, "unknown builtin tag");
}

PlaneMap PlaneMap::builtin(const std::string& tag) {
  if (tag == "F0") return builtin(BuiltinTag::F0);
  if (tag == "F1") return builtin(BuiltinTag::F1);
  if (tag == "F2") return builtin(BuiltinTag::F2);
  if (tag == "F3") return builtin(BuiltinTag::F3);
  fail(Error::Kind::Precondition, "unknown builtin tag '" + tag + "'");
}

PlaneMap PlaneMap::black_box(std::function<Vec2(Vec2)> f, std::string name,
                             std::optional<InfinityHint> hint) {
  PlaneMap m;
  m.name_ = std::move(name);
  m.source_ = "<black box>";
  m.fd_ = std::make_shared<const std::function<Vec2(Vec2)>>(std::move(f));
  m.hint_ = hint;
  m.validate_hint();
  return m;
}

Vec2 PlaneMap::operator()(Vec2 p) const {
  if (fd_) return (*fd_)(p);
  double out[2];
  prog_value_->eval(p.x, p.y, out);
  return {out[0], out[1]};
}

void PlaneMap::eval_fdf(Vec2 p, Vec2& f, Mat2& jac) const {
  if (fd_) {
    Jet2 j = jet(p);
    f = j.value;
    jac = j.jacobian;
    return;
  }
  double out[6];
  prog_fdf_->eval(p.x, p.y, out);
  f = {out[0], out[1]};
  jac = {out[2], out[3], out[4], out[5]};
  if (!f.finite() || !jac.finite())
    fail(Error::Kind::Eval, "non-finite value or Jacobian at (" + format_double(p.x) + ", " +
                                format_double(p.y) + ")");
}

Jet2 PlaneMap::jet(Vec2 p) const {
  if (!p.finite()) fail(Error::Kind::Precondition, "jet requested at a non-finite point");
  Jet2 j;
  if (fd_) {
    const auto& f = *fd_;
    j.value = f(p);
    double h1 = 1e-6 * (1.0 + std::max(std::abs(p.x), std::abs(p.y)));
    Vec2 fxp = f({p.x + h1, p.y}), fxm = f({p.x - h1, p.y});
    Vec2 fyp = f({p.x, p.y + h1}), fym = f({p.x, p.y - h1});
    j.jacobian = {(fxp.x - fxm.x) / (2 * h1), (fyp.x - fym.x) / (2 * h1),
                  (fxp.y - fxm.y) / (2 * h1), (fyp.y - fym.y) / (2 * h1)};
    double h2 = 1e-4 * (1.0 + std::max(std::abs(p.x), std::abs(p.y)));
    Vec2 c = j.value;
    Vec2 xp = f({p.x + h2, p.y}), xm = f({p.x - h2, p.y});
    Vec2 yp = f({p.x, p.y + h2}), ym = f({p.x, p.y - h2});
    Vec2 pp = f({p.x + h2, p.y + h2}), pm = f({p.x + h2, p.y - h2});
    Vec2 mp = f({p.x - h2, p.y + h2}), mm = f({p.x - h2, p.y - h2});
    double inv = 1.0 / (h2 * h2);
    j.hess_x = {(xp.x - 2 * c.x + xm.x) * inv, (pp.x - pm.x - mp.x + mm.x) * inv / 4.0,
                (yp.x - 2 * c.x + ym.x) * inv};
    j.hess_y = {(xp.y - 2 * c.y + xm.y) * inv, (pp.y - pm.y - mp.y + mm.y) * inv / 4.0,
                (yp.y - 2 * c.y + ym.y) * inv};
  } else {
    double out[12];
    prog_jet_->eval(p.x, p.y, out);
    j.value = {out[0], out[1]};
    j.jacobian = {out[2], out[3], out[4], out[5]};
    j.hess_x = {out[6], out[7], out[8]};
    j.hess_y = {out[9], out[10], out[11]};
  }
  if (!j.value.finite() || !j.jacobian.finite() || !j.hess_x.finite() || !j.hess_y.finite())
    fail(Error::Kind::Eval, "non-finite jet at (" + format_double(p.x) + ", " +
                                format_double(p.y) + ")");
  return j;
}

std::string PlaneMap::pretty_source() const {
  if (!syntax_) return {};
  return pretty_print(syntax_);
}

}  // namespace atlas
