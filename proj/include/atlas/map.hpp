#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "atlas/expr.hpp"
#include "atlas/geom2.hpp"

namespace atlas {

enum class BuiltinTag { F0, F1, F2, F3 };

// Dominant monomial c * z^n behavior near infinity.
struct InfinityHint {
  int degree = 0;
  std::complex<double> coefficient{1.0, 0.0};
};

// Value plus exact first and second partials at a point.
struct Jet2 {
  Vec2 value;
  Mat2 jacobian;       // [[dFx/dx, dFx/dy], [dFy/dx, dFy/dy]]
  Sym2 hess_x, hess_y; // second partials of the two components

  double det() const { return jacobian.det(); }

  // Gradient of det DF, expanded from the product rule over second partials.
  Vec2 grad_det() const {
    const Mat2& j = jacobian;
    double dx = hess_x.xx * j.d + j.a * hess_y.xy - hess_x.xy * j.c - j.b * hess_y.xx;
    double dy = hess_x.xy * j.d + j.a * hess_y.yy - hess_x.yy * j.c - j.b * hess_y.xy;
    return {dx, dy};
  }

  // Unit kernel direction of the (near-)singular Jacobian: perpendicular of
  // the better-conditioned row.
  Vec2 kernel_dir() const {
    Vec2 row1{jacobian.a, jacobian.b}, row2{jacobian.c, jacobian.d};
    Vec2 r = row1.norm2() >= row2.norm2() ? row1 : row2;
    if (r.norm() == 0.0) fail(Error::Kind::Numeric, "zero Jacobian has no kernel direction");
    return normalized(perp(r));
  }

  // Scale-aware tolerance for treating det DF as zero.
  double det_tol(double tol_scale = 1e-9) const {
    return tol_scale * (1.0 + std::abs(jacobian.a * jacobian.d) + std::abs(jacobian.b * jacobian.c));
  }
};

// An immutable plane map with closed-form evaluators for F, DF and D2F.
// Evaluation is pure and reentrant; instances may be shared across threads.
class PlaneMap {
 public:
  static PlaneMap parse(const std::string& source, ParseMode mode, std::string name = "");
  static PlaneMap builtin(BuiltinTag tag);
  static PlaneMap builtin(const std::string& tag);  // "F0".."F3"; throws on unknown tag

  // Black-box map with finite-difference derivatives. Flagged in reports;
  // symbolic maps are preferred wherever derivatives feed root finding.
  static PlaneMap black_box(std::function<Vec2(Vec2)> f, std::string name,
                            std::optional<InfinityHint> hint = std::nullopt);

  Vec2 operator()(Vec2 p) const;
  void eval_fdf(Vec2 p, Vec2& f, Mat2& jac) const;
  Jet2 jet(Vec2 p) const;

  const std::string& name() const { return name_; }
  const std::string& source() const { return source_; }
  ParseMode mode() const { return mode_; }
  bool uses_fd_derivatives() const { return fd_ != nullptr; }
  const std::optional<InfinityHint>& infinity_hint() const { return hint_; }

  // Canonical re-print of the parsed source (empty for black boxes).
  std::string pretty_source() const;

 private:
  PlaneMap() = default;
  static PlaneMap from_parsed(ParsedSource parsed, std::string name, std::string source_text,
                              std::optional<InfinityHint> hint, bool infer_hint);
  void validate_hint();

  std::string name_, source_;
  ParseMode mode_ = ParseMode::RealXY;
  Src syntax_;
  std::shared_ptr<const Program> prog_value_, prog_fdf_, prog_jet_;
  std::shared_ptr<const std::function<Vec2(Vec2)>> fd_;  // black-box path
  std::optional<InfinityHint> hint_;
};

const char* builtin_name(BuiltinTag tag);

}  // namespace atlas
