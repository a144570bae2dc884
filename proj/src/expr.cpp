#include "atlas/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>

namespace atlas {

namespace {

Ex make(ExOp op, double value, int exponent, Ex a, Ex b) {
  auto n = std::make_shared<ExNode>();
  n->op = op;
  n->value = value;
  n->exponent = exponent;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

bool is_const(const Ex& e, double v) { return e->op == ExOp::Const && e->value == v; }

double apply_fn(ExOp op, double v) {
  switch (op) {
    case ExOp::Sin: return std::sin(v);
    case ExOp::Cos: return std::cos(v);
    case ExOp::Exp: return std::exp(v);
    case ExOp::Sinh: return std::sinh(v);
    case ExOp::Cosh: return std::cosh(v);
    default: fail(Error::Kind::Eval, "not a function op");
  }
}

}  // namespace

Ex ex_const(double v) { return make(ExOp::Const, v, 0, nullptr, nullptr); }

Ex ex_x() {
  static const Ex x = make(ExOp::VarX, 0, 0, nullptr, nullptr);
  return x;
}

Ex ex_y() {
  static const Ex y = make(ExOp::VarY, 0, 0, nullptr, nullptr);
  return y;
}

Ex ex_add(Ex a, Ex b) {
  if (a->op == ExOp::Const && b->op == ExOp::Const) return ex_const(a->value + b->value);
  if (is_const(a, 0)) return b;
  if (is_const(b, 0)) return a;
  return make(ExOp::Add, 0, 0, std::move(a), std::move(b));
}

Ex ex_sub(Ex a, Ex b) {
  if (a->op == ExOp::Const && b->op == ExOp::Const) return ex_const(a->value - b->value);
  if (is_const(b, 0)) return a;
  if (is_const(a, 0)) return ex_neg(std::move(b));
  return make(ExOp::Sub, 0, 0, std::move(a), std::move(b));
}

Ex ex_mul(Ex a, Ex b) {
  if (a->op == ExOp::Const && b->op == ExOp::Const) return ex_const(a->value * b->value);
  if (is_const(a, 0) || is_const(b, 0)) return ex_const(0);
  if (is_const(a, 1)) return b;
  if (is_const(b, 1)) return a;
  if (is_const(a, -1)) return ex_neg(std::move(b));
  if (is_const(b, -1)) return ex_neg(std::move(a));
  return make(ExOp::Mul, 0, 0, std::move(a), std::move(b));
}

Ex ex_div(Ex a, Ex b) {
  if (a->op == ExOp::Const && b->op == ExOp::Const && b->value != 0)
    return ex_const(a->value / b->value);
  if (is_const(a, 0) && !is_const(b, 0)) return ex_const(0);
  if (is_const(b, 1)) return a;
  return make(ExOp::Div, 0, 0, std::move(a), std::move(b));
}

Ex ex_neg(Ex a) {
  if (a->op == ExOp::Const) return ex_const(-a->value);
  if (a->op == ExOp::Neg) return a->a;
  return make(ExOp::Neg, 0, 0, std::move(a), nullptr);
}

Ex ex_powi(Ex a, int n) {
  if (n < 0) fail(Error::Kind::Parse, "non-integer exponent");
  if (n == 0) return ex_const(1);
  if (n == 1) return a;
  if (a->op == ExOp::Const) return ex_const(std::pow(a->value, n));
  return make(ExOp::Powi, 0, n, std::move(a), nullptr);
}

Ex ex_call(ExOp fn, Ex a) {
  if (a->op == ExOp::Const) return ex_const(apply_fn(fn, a->value));
  return make(fn, 0, 0, std::move(a), nullptr);
}

double ex_eval(const Ex& e, double x, double y) {
  switch (e->op) {
    case ExOp::Const: return e->value;
    case ExOp::VarX: return x;
    case ExOp::VarY: return y;
    case ExOp::Add: return ex_eval(e->a, x, y) + ex_eval(e->b, x, y);
    case ExOp::Sub: return ex_eval(e->a, x, y) - ex_eval(e->b, x, y);
    case ExOp::Mul: return ex_eval(e->a, x, y) * ex_eval(e->b, x, y);
    case ExOp::Div: return ex_eval(e->a, x, y) / ex_eval(e->b, x, y);
    case ExOp::Neg: return -ex_eval(e->a, x, y);
    case ExOp::Powi: {
      double base = ex_eval(e->a, x, y), r = 1.0;
      for (int i = 0; i < e->exponent; ++i) r *= base;
      return r;
    }
    default: return apply_fn(e->op, ex_eval(e->a, x, y));
  }
}

Ex DiffContext::diff(const Ex& e, bool wrt_y) {
  auto& memo = wrt_y ? memo_y_ : memo_x_;
  auto it = memo.find(e.get());
  if (it != memo.end()) return it->second;

  Ex r;
  switch (e->op) {
    case ExOp::Const: r = ex_const(0); break;
    case ExOp::VarX: r = ex_const(wrt_y ? 0 : 1); break;
    case ExOp::VarY: r = ex_const(wrt_y ? 1 : 0); break;
    case ExOp::Add: r = ex_add(diff(e->a, wrt_y), diff(e->b, wrt_y)); break;
    case ExOp::Sub: r = ex_sub(diff(e->a, wrt_y), diff(e->b, wrt_y)); break;
    case ExOp::Mul:
      r = ex_add(ex_mul(diff(e->a, wrt_y), e->b), ex_mul(e->a, diff(e->b, wrt_y)));
      break;
    case ExOp::Div:
      // (u'v - uv') / v^2
      r = ex_div(ex_sub(ex_mul(diff(e->a, wrt_y), e->b), ex_mul(e->a, diff(e->b, wrt_y))),
                 ex_mul(e->b, e->b));
      break;
    case ExOp::Neg: r = ex_neg(diff(e->a, wrt_y)); break;
    case ExOp::Powi:
      r = ex_mul(ex_mul(ex_const(e->exponent), ex_powi(e->a, e->exponent - 1)),
                 diff(e->a, wrt_y));
      break;
    case ExOp::Sin: r = ex_mul(ex_call(ExOp::Cos, e->a), diff(e->a, wrt_y)); break;
    case ExOp::Cos: r = ex_neg(ex_mul(ex_call(ExOp::Sin, e->a), diff(e->a, wrt_y))); break;
    case ExOp::Exp: r = ex_mul(ex_call(ExOp::Exp, e->a), diff(e->a, wrt_y)); break;
    case ExOp::Sinh: r = ex_mul(ex_call(ExOp::Cosh, e->a), diff(e->a, wrt_y)); break;
    case ExOp::Cosh: r = ex_mul(ex_call(ExOp::Sinh, e->a), diff(e->a, wrt_y)); break;
  }
  memo.emplace(e.get(), r);
  return r;
}

// ---------------------------------------------------------------------------
// Tape compiler
// ---------------------------------------------------------------------------

Program Program::compile(std::span<const Ex> roots) {
  Program prog;
  std::unordered_map<const ExNode*, std::int32_t> slot;

  // Iterative post-order so deep chains cannot overflow the stack.
  struct Frame { const ExNode* node; bool expanded; };
  auto emit = [&](const ExNode* n) -> std::int32_t {
    auto it = slot.find(n);
    if (it != slot.end()) return it->second;
    Ins ins;
    ins.op = n->op;
    ins.value = n->value;
    ins.exponent = n->exponent;
    if (n->a) ins.a = slot.at(n->a.get());
    if (n->b) ins.b = slot.at(n->b.get());
    std::int32_t s = static_cast<std::int32_t>(prog.code_.size());
    prog.code_.push_back(ins);
    slot.emplace(n, s);
    return s;
  };

  for (const Ex& root : roots) {
    std::vector<Frame> stack{{root.get(), false}};
    while (!stack.empty()) {
      Frame f = stack.back();
      stack.pop_back();
      if (slot.count(f.node)) continue;
      if (f.expanded) {
        emit(f.node);
      } else {
        stack.push_back({f.node, true});
        if (f.node->a) stack.push_back({f.node->a.get(), false});
        if (f.node->b) stack.push_back({f.node->b.get(), false});
      }
    }
    prog.out_slots_.push_back(slot.at(root.get()));
  }
  return prog;
}

void Program::eval(double x, double y, double* out) const {
  thread_local std::vector<double> scratch;
  if (scratch.size() < code_.size()) scratch.resize(code_.size());
  double* s = scratch.data();

  for (std::size_t i = 0; i < code_.size(); ++i) {
    const Ins& ins = code_[i];
    double r;
    switch (ins.op) {
      case ExOp::Const: r = ins.value; break;
      case ExOp::VarX: r = x; break;
      case ExOp::VarY: r = y; break;
      case ExOp::Add: r = s[ins.a] + s[ins.b]; break;
      case ExOp::Sub: r = s[ins.a] - s[ins.b]; break;
      case ExOp::Mul: r = s[ins.a] * s[ins.b]; break;
      case ExOp::Div: r = s[ins.a] / s[ins.b]; break;
      case ExOp::Neg: r = -s[ins.a]; break;
      case ExOp::Powi: {
        double base = s[ins.a];
        r = 1.0;
        for (int k = 0; k < ins.exponent; ++k) r *= base;
        break;
      }
      case ExOp::Sin: r = std::sin(s[ins.a]); break;
      case ExOp::Cos: r = std::cos(s[ins.a]); break;
      case ExOp::Exp: r = std::exp(s[ins.a]); break;
      case ExOp::Sinh: r = std::sinh(s[ins.a]); break;
      case ExOp::Cosh: r = std::cosh(s[ins.a]); break;
      default: r = 0.0; break;
    }
    s[i] = r;
  }
  for (std::size_t i = 0; i < out_slots_.size(); ++i) {
    out[i] = s[out_slots_[i]];
    if (!std::isfinite(out[i]))
      fail(Error::Kind::Eval, "evaluation produced a non-finite value");
  }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

class Parser {
 public:
  Parser(const std::string& text, ParseMode mode) : text_(text), mode_(mode) {}

  Src parse_top() {
    skip_ws();
    Src result;
    if (mode_ == ParseMode::RealXY) {
      // top level must be a component pair
      if (!eat('('))
        throw SyntaxError(pos_, "real-mode map must be a pair '(fx, fy)'");
      Src a = parse_expr();
      if (!eat(',')) throw SyntaxError(pos_, "expected ',' between components");
      Src b = parse_expr();
      if (!eat(')')) throw SyntaxError(pos_, "expected ')' closing the pair");
      auto pair = std::make_shared<SrcNode>();
      pair->k = SrcNode::K::Pair;
      pair->a = a;
      pair->b = b;
      result = pair;
    } else {
      result = parse_expr();
    }
    skip_ws();
    if (pos_ != text_.size())
      throw SyntaxError(pos_, "unexpected trailing input");
    return result;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Src parse_expr() {
    skip_ws();
    Src left;
    if (eat('-')) {
      auto n = std::make_shared<SrcNode>();
      n->k = SrcNode::K::Neg;
      n->a = parse_term();
      left = n;
    } else {
      left = parse_term();
    }
    for (;;) {
      char c = peek();
      if (c == '+' || c == '-') {
        ++pos_;
        Src right = parse_term();
        auto n = std::make_shared<SrcNode>();
        n->k = c == '+' ? SrcNode::K::Add : SrcNode::K::Sub;
        n->a = left;
        n->b = right;
        left = n;
      } else {
        return left;
      }
    }
  }

  Src parse_term() {
    Src left = parse_factor();
    for (;;) {
      char c = peek();
      if (c == '*' || c == '/') {
        ++pos_;
        Src right = parse_factor();
        auto n = std::make_shared<SrcNode>();
        n->k = c == '*' ? SrcNode::K::Mul : SrcNode::K::Div;
        n->a = left;
        n->b = right;
        left = n;
      } else {
        return left;
      }
    }
  }

  Src parse_factor() {
    Src base = parse_base();
    if (eat('^')) {
      skip_ws();
      std::size_t at = pos_;
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+'))
        throw SyntaxError(at, "non-integer exponent: exponents must be non-negative integers");
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
        throw SyntaxError(at, "non-integer exponent");
      long n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        n = n * 10 + (text_[pos_] - '0');
        if (n > 64) throw SyntaxError(at, "exponent too large (max 64)");
        ++pos_;
      }
      if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
        throw SyntaxError(at, "non-integer exponent");
      auto p = std::make_shared<SrcNode>();
      p->k = SrcNode::K::Pow;
      p->exponent = static_cast<int>(n);
      p->a = base;
      return p;
    }
    return base;
  }

  Src parse_base() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, "unexpected end of input");
    char c = text_[pos_];

    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();

    if (c == '(') {
      ++pos_;
      Src inner = parse_expr();
      if (!eat(')')) throw SyntaxError(pos_, "expected ')'");
      return inner;
    }

    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      std::string ident = text_.substr(start, pos_ - start);

      if (peek() == '(') {
        if (ident != "sin" && ident != "cos" && ident != "exp")
          throw SyntaxError(start, "unsupported function '" + ident + "'");
        ++pos_;  // consumes '('
        Src arg = parse_expr();
        if (!eat(')')) throw SyntaxError(pos_, "expected ')' closing call");
        auto n = std::make_shared<SrcNode>();
        n->k = SrcNode::K::Call;
        n->name = ident;
        n->a = arg;
        return n;
      }

      bool ok = mode_ == ParseMode::RealXY ? (ident == "x" || ident == "y")
                                           : (ident == "z" || ident == "zbar");
      if (!ok)
        throw SyntaxError(start, "unknown variable '" + ident + "' for this mode");
      auto n = std::make_shared<SrcNode>();
      n->k = SrcNode::K::Var;
      n->name = ident;
      return n;
    }

    throw SyntaxError(pos_, std::string("unexpected character '") + c + "'");
  }

  Src parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // 'e' was not an exponent
      }
    }
    double v = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc())
      throw SyntaxError(start, "malformed number literal");
    auto n = std::make_shared<SrcNode>();
    n->k = SrcNode::K::Number;
    n->number = v;
    return n;
  }

  const std::string& text_;
  ParseMode mode_;
  std::size_t pos_ = 0;
};

// Pair of real DAGs representing re + i*im.
struct CEx {
  Ex re, im;
};

CEx c_add(const CEx& a, const CEx& b) { return {ex_add(a.re, b.re), ex_add(a.im, b.im)}; }
CEx c_sub(const CEx& a, const CEx& b) { return {ex_sub(a.re, b.re), ex_sub(a.im, b.im)}; }
CEx c_neg(const CEx& a) { return {ex_neg(a.re), ex_neg(a.im)}; }

CEx c_mul(const CEx& a, const CEx& b) {
  return {ex_sub(ex_mul(a.re, b.re), ex_mul(a.im, b.im)),
          ex_add(ex_mul(a.re, b.im), ex_mul(a.im, b.re))};
}

CEx c_div(const CEx& a, const CEx& b) {
  Ex den = ex_add(ex_mul(b.re, b.re), ex_mul(b.im, b.im));
  return {ex_div(ex_add(ex_mul(a.re, b.re), ex_mul(a.im, b.im)), den),
          ex_div(ex_sub(ex_mul(a.im, b.re), ex_mul(a.re, b.im)), den)};
}

CEx c_powi(CEx a, int n) {
  CEx r{ex_const(1), ex_const(0)};
  while (n > 0) {
    if (n & 1) r = c_mul(r, a);
    a = c_mul(a, a);
    n >>= 1;
  }
  return r;
}

CEx c_call(const std::string& fn, const CEx& v) {
  // sin(a+bi) = sin a cosh b + i cos a sinh b
  // cos(a+bi) = cos a cosh b - i sin a sinh b
  // exp(a+bi) = e^a (cos b + i sin b)
  if (fn == "sin")
    return {ex_mul(ex_call(ExOp::Sin, v.re), ex_call(ExOp::Cosh, v.im)),
            ex_mul(ex_call(ExOp::Cos, v.re), ex_call(ExOp::Sinh, v.im))};
  if (fn == "cos")
    return {ex_mul(ex_call(ExOp::Cos, v.re), ex_call(ExOp::Cosh, v.im)),
            ex_neg(ex_mul(ex_call(ExOp::Sin, v.re), ex_call(ExOp::Sinh, v.im)))};
  Ex ea = ex_call(ExOp::Exp, v.re);
  return {ex_mul(ea, ex_call(ExOp::Cos, v.im)), ex_mul(ea, ex_call(ExOp::Sin, v.im))};
}

Ex lower_real(const Src& s) {
  switch (s->k) {
    case SrcNode::K::Number: return ex_const(s->number);
    case SrcNode::K::Var: return s->name == "x" ? ex_x() : ex_y();
    case SrcNode::K::Add: return ex_add(lower_real(s->a), lower_real(s->b));
    case SrcNode::K::Sub: return ex_sub(lower_real(s->a), lower_real(s->b));
    case SrcNode::K::Mul: return ex_mul(lower_real(s->a), lower_real(s->b));
    case SrcNode::K::Div: return ex_div(lower_real(s->a), lower_real(s->b));
    case SrcNode::K::Neg: return ex_neg(lower_real(s->a));
    case SrcNode::K::Pow: return ex_powi(lower_real(s->a), s->exponent);
    case SrcNode::K::Call: {
      ExOp op = s->name == "sin" ? ExOp::Sin : s->name == "cos" ? ExOp::Cos : ExOp::Exp;
      return ex_call(op, lower_real(s->a));
    }
    case SrcNode::K::Pair: fail(Error::Kind::Parse, "nested pair");
  }
  fail(Error::Kind::Parse, "bad syntax node");
}

CEx lower_complex(const Src& s) {
  switch (s->k) {
    case SrcNode::K::Number: return {ex_const(s->number), ex_const(0)};
    case SrcNode::K::Var:
      if (s->name == "z") return {ex_x(), ex_y()};
      return {ex_x(), ex_neg(ex_y())};  // zbar
    case SrcNode::K::Add: return c_add(lower_complex(s->a), lower_complex(s->b));
    case SrcNode::K::Sub: return c_sub(lower_complex(s->a), lower_complex(s->b));
    case SrcNode::K::Mul: return c_mul(lower_complex(s->a), lower_complex(s->b));
    case SrcNode::K::Div: return c_div(lower_complex(s->a), lower_complex(s->b));
    case SrcNode::K::Neg: return c_neg(lower_complex(s->a));
    case SrcNode::K::Pow: return c_powi(lower_complex(s->a), s->exponent);
    case SrcNode::K::Call: return c_call(s->name, lower_complex(s->a));
    case SrcNode::K::Pair: fail(Error::Kind::Parse, "pair not allowed in complex mode");
  }
  fail(Error::Kind::Parse, "bad syntax node");
}

}  // namespace

ParsedSource parse_map_source(const std::string& text, ParseMode mode) {
  Parser parser(text, mode);
  Src syntax = parser.parse_top();
  ParsedSource out;
  out.syntax = syntax;
  out.mode = mode;
  if (mode == ParseMode::RealXY) {
    out.fx = lower_real(syntax->a);
    out.fy = lower_real(syntax->b);
  } else {
    CEx c = lower_complex(syntax);
    out.fx = c.re;
    out.fy = c.im;
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

int src_prec(const SrcNode& n) {
  switch (n.k) {
    case SrcNode::K::Add:
    case SrcNode::K::Sub: return 1;
    case SrcNode::K::Mul:
    case SrcNode::K::Div: return 2;
    case SrcNode::K::Neg: return 1;  // prints as leading '-term'
    case SrcNode::K::Pow: return 3;
    default: return 4;
  }
}

void print_rec(const Src& s, std::string& out, int parent_prec, bool right_operand) {
  int prec = src_prec(*s);
  bool paren = prec < parent_prec ||
               (prec == parent_prec && right_operand &&
                (s->k == SrcNode::K::Add || s->k == SrcNode::K::Sub || s->k == SrcNode::K::Mul ||
                 s->k == SrcNode::K::Div || s->k == SrcNode::K::Neg));
  if (paren) out += '(';
  switch (s->k) {
    case SrcNode::K::Number: {
      if (s->number < 0) {
        // keep literal negatives parenthesized so reparse matches
        out += '(';
        out += format_double(s->number);
        out += ')';
        if (paren) out += ')';
        return;
      }
      out += format_double(s->number);
      break;
    }
    case SrcNode::K::Var: out += s->name; break;
    case SrcNode::K::Add:
      print_rec(s->a, out, 1, false);
      out += " + ";
      print_rec(s->b, out, 1, true);
      break;
    case SrcNode::K::Sub:
      print_rec(s->a, out, 1, false);
      out += " - ";
      print_rec(s->b, out, 1, true);
      break;
    case SrcNode::K::Mul:
      print_rec(s->a, out, 2, false);
      out += "*";
      print_rec(s->b, out, 2, true);
      break;
    case SrcNode::K::Div:
      print_rec(s->a, out, 2, false);
      out += "/";
      print_rec(s->b, out, 2, true);
      break;
    case SrcNode::K::Neg:
      out += "-";
      print_rec(s->a, out, 2, true);
      break;
    case SrcNode::K::Pow:
      print_rec(s->a, out, 4, false);
      out += "^";
      out += std::to_string(s->exponent);
      break;
    case SrcNode::K::Call:
      out += s->name;
      out += '(';
      print_rec(s->a, out, 0, false);
      out += ')';
      break;
    case SrcNode::K::Pair:
      out += '(';
      print_rec(s->a, out, 0, false);
      out += ", ";
      print_rec(s->b, out, 0, false);
      out += ')';
      break;
  }
  if (paren) out += ')';
}

using MonoMap = std::unordered_map<std::uint64_t, std::complex<double>>;

std::uint64_t mono_key(int p, int q) {
  return (static_cast<std::uint64_t>(p) << 32) | static_cast<std::uint32_t>(q);
}

std::optional<MonoMap> poly_rec(const Src& s) {
  using std::complex;
  switch (s->k) {
    case SrcNode::K::Number: {
      MonoMap m;
      if (s->number != 0) m[mono_key(0, 0)] = complex<double>(s->number, 0);
      return m;
    }
    case SrcNode::K::Var: {
      MonoMap m;
      if (s->name == "z") m[mono_key(1, 0)] = complex<double>(1, 0);
      else m[mono_key(0, 1)] = complex<double>(1, 0);
      return m;
    }
    case SrcNode::K::Add:
    case SrcNode::K::Sub: {
      auto a = poly_rec(s->a), b = poly_rec(s->b);
      if (!a || !b) return std::nullopt;
      double sign = s->k == SrcNode::K::Add ? 1.0 : -1.0;
      for (auto& [k, c] : *b) (*a)[k] += sign * c;
      return a;
    }
    case SrcNode::K::Neg: {
      auto a = poly_rec(s->a);
      if (!a) return std::nullopt;
      for (auto& [k, c] : *a) c = -c;
      return a;
    }
    case SrcNode::K::Mul: {
      auto a = poly_rec(s->a), b = poly_rec(s->b);
      if (!a || !b) return std::nullopt;
      MonoMap m;
      for (auto& [ka, ca] : *a)
        for (auto& [kb, cb] : *b) {
          int p = static_cast<int>(ka >> 32) + static_cast<int>(kb >> 32);
          int q = static_cast<int>(ka & 0xffffffffu) + static_cast<int>(kb & 0xffffffffu);
          m[mono_key(p, q)] += ca * cb;
        }
      return m;
    }
    case SrcNode::K::Div: {
      auto a = poly_rec(s->a), b = poly_rec(s->b);
      if (!a || !b) return std::nullopt;
      // only division by a nonzero constant keeps the expression polynomial
      if (b->size() != 1 || b->begin()->first != mono_key(0, 0)) return std::nullopt;
      auto c = b->begin()->second;
      if (c == std::complex<double>(0, 0)) return std::nullopt;
      for (auto& [k, v] : *a) v /= c;
      return a;
    }
    case SrcNode::K::Pow: {
      auto a = poly_rec(s->a);
      if (!a) return std::nullopt;
      MonoMap r;
      r[mono_key(0, 0)] = std::complex<double>(1, 0);
      for (int i = 0; i < s->exponent; ++i) {
        MonoMap m;
        for (auto& [ka, ca] : r)
          for (auto& [kb, cb] : *a) {
            int p = static_cast<int>(ka >> 32) + static_cast<int>(kb >> 32);
            int q = static_cast<int>(ka & 0xffffffffu) + static_cast<int>(kb & 0xffffffffu);
            m[mono_key(p, q)] += ca * cb;
          }
        r = std::move(m);
      }
      return r;
    }
    default: return std::nullopt;  // Call, Pair
  }
}

}  // namespace

std::string pretty_print(const Src& s) {
  std::string out;
  print_rec(s, out, 0, false);
  return out;
}

std::optional<std::vector<ComplexMonomial>> complex_polynomial(const Src& s) {
  auto m = poly_rec(s);
  if (!m) return std::nullopt;
  std::vector<ComplexMonomial> v;
  for (auto& [k, c] : *m) {
    if (std::abs(c) == 0.0) continue;
    v.push_back({static_cast<int>(k >> 32), static_cast<int>(k & 0xffffffffu), c});
  }
  std::sort(v.begin(), v.end(), [](const ComplexMonomial& a, const ComplexMonomial& b) {
    int da = a.z_deg + a.zbar_deg, db = b.z_deg + b.zbar_deg;
    if (da != db) return da > db;
    return a.z_deg > b.z_deg;
  });
  return v;
}

}  // namespace atlas
