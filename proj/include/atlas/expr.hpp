#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "atlas/geom2.hpp"

namespace atlas {

// ---------------------------------------------------------------------------
// Real expression DAG over the variables (x, y).
//
// Nodes are immutable and shared; symbolic differentiation and common
// subexpressions therefore produce a DAG rather than an exploding tree.
// Sinh/Cosh are internal only (they appear when complex sin/cos/exp are
// expanded into real and imaginary parts); the surface grammar does not
// admit them.
// ---------------------------------------------------------------------------

enum class ExOp : std::uint8_t {
  Const, VarX, VarY,
  Add, Sub, Mul, Div, Neg, Powi,
  Sin, Cos, Exp, Sinh, Cosh,
};

struct ExNode;
using Ex = std::shared_ptr<const ExNode>;

struct ExNode {
  ExOp op;
  double value = 0.0;  // Const
  int exponent = 0;    // Powi
  Ex a, b;
};

Ex ex_const(double v);
Ex ex_x();
Ex ex_y();
Ex ex_add(Ex a, Ex b);
Ex ex_sub(Ex a, Ex b);
Ex ex_mul(Ex a, Ex b);
Ex ex_div(Ex a, Ex b);
Ex ex_neg(Ex a);
Ex ex_powi(Ex a, int n);  // n >= 0
Ex ex_call(ExOp fn, Ex a);

// Direct recursive evaluation. Convenient for tests and one-off values;
// hot paths compile a Program instead.
double ex_eval(const Ex& e, double x, double y);

// Symbolic partial derivative with memoization across shared nodes.
class DiffContext {
 public:
  Ex d_dx(const Ex& e) { return diff(e, false); }
  Ex d_dy(const Ex& e) { return diff(e, true); }

 private:
  Ex diff(const Ex& e, bool wrt_y);
  std::unordered_map<const ExNode*, Ex> memo_x_, memo_y_;
};

// ---------------------------------------------------------------------------
// Compiled evaluation tape. Each unique DAG node is evaluated exactly once
// per call, so jets of high-degree maps stay cheap.
// ---------------------------------------------------------------------------

class Program {
 public:
  static Program compile(std::span<const Ex> roots);

  std::size_t n_outputs() const { return out_slots_.size(); }

  // Writes n_outputs() doubles into out. Throws Error(Eval) when any output
  // is non-finite. Reentrant; safe to call concurrently.
  void eval(double x, double y, double* out) const;

 private:
  struct Ins {
    ExOp op;
    std::int32_t a = -1, b = -1;
    double value = 0.0;
    std::int32_t exponent = 0;
  };
  std::vector<Ins> code_;
  std::vector<std::int32_t> out_slots_;
};

// ---------------------------------------------------------------------------
// Surface syntax.
//
//   expr   := ['-'] term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ['^' integer]
//   base   := number | 'x' | 'y' | 'z' | 'zbar' | func '(' expr ')' | '(' expr ')'
//   func   := 'sin' | 'cos' | 'exp'
//
// Real mode sources are component pairs '(' expr ',' expr ')' at top level
// over (x, y); complex mode sources are single expressions over (z, zbar).
// ---------------------------------------------------------------------------

enum class ParseMode { RealXY, ComplexZ };

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& msg)
      : Error(Kind::Parse, msg + " (at position " + std::to_string(position) + ")"),
        position(position) {}
  std::size_t position;
};

struct SrcNode;
using Src = std::shared_ptr<const SrcNode>;

struct SrcNode {
  enum class K { Number, Var, Add, Sub, Mul, Div, Neg, Pow, Call, Pair };
  K k;
  double number = 0.0;
  std::string name;  // Var / Call
  int exponent = 0;  // Pow
  Src a, b;
};

struct ParsedSource {
  Src syntax;  // as written, for pretty-printing
  Ex fx, fy;   // lowered real components
  ParseMode mode;
};

ParsedSource parse_map_source(const std::string& text, ParseMode mode);

// Canonical text form; parse(pretty_print(parse(s))) evaluates identically
// to parse(s).
std::string pretty_print(const Src& s);

// Exact double -> shortest round-trip text.
std::string format_double(double v);

// Monomial c * z^p * zbar^q of a complex polynomial.
struct ComplexMonomial {
  int z_deg = 0;
  int zbar_deg = 0;
  std::complex<double> coeff;
};

// Expands a complex-mode syntax tree into monomials, or nullopt when the
// expression is not polynomial in z and zbar (functions, non-constant
// divisors).
std::optional<std::vector<ComplexMonomial>> complex_polynomial(const Src& s);

}  // namespace atlas
