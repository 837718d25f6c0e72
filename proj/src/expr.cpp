#include "sticky/expr.hpp"

#include <cctype>
#include <cstdlib>
#include <cmath>
#include <numbers>
#include <string>

namespace sticky {

Jet Jet::constant(double c, int dim) {
  Jet j;
  j.v = c;
  j.g = Vec::Zero(dim);
  j.h = Mat::Zero(dim, dim);
  return j;
}

Jet Jet::variable(double value, int index, int dim) {
  Jet j = constant(value, dim);
  j.g[index] = 1.0;
  return j;
}

namespace {

// Chain rule for phi(a) given phi, phi', phi'' at a.v.
Jet chain(const Jet& a, double f0, double f1, double f2) {
  Jet r;
  r.v = f0;
  r.g = f1 * a.g;
  r.h = f1 * a.h + f2 * (a.g * a.g.transpose());
  return r;
}

Jet operator+(const Jet& a, const Jet& b) { return {a.v + b.v, a.g + b.g, a.h + b.h}; }
Jet operator-(const Jet& a, const Jet& b) { return {a.v - b.v, a.g - b.g, a.h - b.h}; }
Jet operator-(const Jet& a) { return {-a.v, -a.g, -a.h}; }

Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v * b.v;
  r.g = a.v * b.g + b.v * a.g;
  r.h = a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose();
  return r;
}

Jet reciprocal(const Jet& a) {
  const double v = a.v;
  return chain(a, 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

Jet jexp(const Jet& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}
Jet jlog(const Jet& a) { return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }
Jet jsqrt(const Jet& a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}
Jet jsin(const Jet& a) { return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
Jet jcos(const Jet& a) { return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
Jet jtanh(const Jet& a) {
  const double t = std::tanh(a.v);
  const double s = 1.0 - t * t;
  return chain(a, t, s, -2.0 * t * s);
}
Jet jsinh(const Jet& a) { return chain(a, std::sinh(a.v), std::cosh(a.v), std::sinh(a.v)); }
Jet jcosh(const Jet& a) { return chain(a, std::cosh(a.v), std::sinh(a.v), std::cosh(a.v)); }

Jet jpow(const Jet& a, const Jet& b) {
  const bool constant_exponent = b.g.isZero(0.0) && b.h.isZero(0.0);
  if (constant_exponent) {
    const double p = b.v;
    if (p == 0.0) return Jet::constant(1.0, static_cast<int>(a.g.size()));
    const double f0 = std::pow(a.v, p);
    const double f1 = p * std::pow(a.v, p - 1.0);
    const double f2 = (p == 1.0) ? 0.0 : p * (p - 1.0) * std::pow(a.v, p - 2.0);
    return chain(a, f0, f1, f2);
  }
  return jexp(b * jlog(a));
}

double dpow(double a, double b) { return std::pow(a, b); }

// smin(a,b,k) = -k log(exp(-a/k) + exp(-b/k)), written around the smaller
// argument so the exponential never overflows.
template <class S>
S smooth_min(const S& a, const S& b, const S& k);

template <>
double smooth_min(const double& a, const double& b, const double& k) {
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  return lo - k * std::log1p(std::exp(-(hi - lo) / k));
}

template <>
Jet smooth_min(const Jet& a, const Jet& b, const Jet& k) {
  const Jet& lo = a.v <= b.v ? a : b;
  const Jet& hi = a.v <= b.v ? b : a;
  const int d = static_cast<int>(a.g.size());
  return lo - k * jlog(Jet::constant(1.0, d) + jexp(-((hi - lo) / k)));
}

}  // namespace

// -------------------------------------------------------------------------
// Parser

class ExpressionParser {
 public:
  ExpressionParser(std::string_view src, int dim, Expression& out) : src_(src), dim_(dim), out_(out) {}

  int parse() {
    const int root = expr();
    skip_ws();
    if (pos_ < src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression '" + std::string(src_) + "': " + msg, 1, static_cast<int>(pos_) + 1);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  int add(Expression::Node n) {
    out_.nodes_.push_back(n);
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  int binary(Expression::Op op, int a, int b) {
    Expression::Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    return add(n);
  }

  int constant(double c) {
    Expression::Node n;
    n.op = Expression::Op::kConst;
    n.constant = c;
    return add(n);
  }

  int expr() {
    int lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Expression::Op::kAdd, lhs, term());
      } else if (accept('-')) {
        lhs = binary(Expression::Op::kSub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  int term() {
    int lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = binary(Expression::Op::kMul, lhs, unary());
      } else if (accept('/')) {
        lhs = binary(Expression::Op::kDiv, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  int unary() {
    if (accept('-')) {
      Expression::Node n;
      n.op = Expression::Op::kNeg;
      n.a = unary();
      return add(n);
    }
    if (accept('+')) return unary();
    return power();
  }

  int power() {
    const int base = primary();
    if (accept('^')) return binary(Expression::Op::kPow, base, unary());
    return base;
  }

  int primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (accept('(')) {
      const int inner = expr();
      expect(')');
      return inner;
    }
    fail(std::string("unexpected '") + c + "'");
  }

  int number() {
    const std::string rest(src_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    const auto consumed = static_cast<std::size_t>(end - rest.c_str());
    if (consumed == 0) fail("malformed number");
    pos_ += consumed;
    return constant(v);
  }

  int identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name(src_.substr(start, pos_ - start));

    skip_ws();
    const bool call = pos_ < src_.size() && src_[pos_] == '(';
    if (!call) {
      if (name == "pi") return constant(std::numbers::pi);
      if (name == "e") return constant(std::numbers::e);
      int index = -1;
      if (name == "x" || name == "x1") index = 0;
      if (name == "y" || name == "x2") index = 1;
      if (name == "z" || name == "x3") index = 2;
      if (index < 0) {
        pos_ = start;
        fail("unknown identifier '" + name + "'");
      }
      if (index >= dim_) {
        pos_ = start;
        fail("coordinate '" + name + "' exceeds dimension " + std::to_string(dim_));
      }
      Expression::Node n;
      n.op = Expression::Op::kVar;
      n.var = index;
      return add(n);
    }

    expect('(');
    std::vector<int> args{expr()};
    while (accept(',')) args.push_back(expr());
    expect(')');

    auto require = [&](std::size_t count) {
      if (args.size() != count) {
        pos_ = start;
        fail("function '" + name + "' expects " + std::to_string(count) + " argument(s)");
      }
    };
    using Op = Expression::Op;
    static const std::pair<const char*, Op> unary_fns[] = {
        {"exp", Op::kExp},   {"log", Op::kLog},   {"sqrt", Op::kSqrt}, {"sin", Op::kSin},
        {"cos", Op::kCos},   {"tanh", Op::kTanh}, {"sinh", Op::kSinh}, {"cosh", Op::kCosh}};
    for (const auto& [fname, op] : unary_fns) {
      if (name == fname) {
        require(1);
        Expression::Node n;
        n.op = op;
        n.a = args[0];
        return add(n);
      }
    }
    if (name == "pow") {
      require(2);
      return binary(Op::kPow, args[0], args[1]);
    }
    if (name == "smin" || name == "smax") {
      require(3);
      Expression::Node n;
      n.op = name == "smin" ? Op::kSmin : Op::kSmax;
      n.a = args[0];
      n.b = args[1];
      n.c = args[2];
      return add(n);
    }
    pos_ = start;
    fail("unknown function '" + name + "'");
  }

  std::string_view src_;
  int dim_;
  Expression& out_;
  std::size_t pos_ = 0;
};

Expression Expression::parse(std::string_view source, int dim) {
  if (dim < 1 || dim > kMaxDim) throw ParseError("dimension out of range", 1, 1);
  Expression e;
  e.dim_ = dim;
  e.source_ = std::string(source);
  ExpressionParser parser(source, dim, e);
  e.root_ = parser.parse();
  return e;
}

bool Expression::is_constant() const noexcept {
  for (const auto& n : nodes_)
    if (n.op == Op::kVar) return false;
  return true;
}

template <class S>
S Expression::eval(int index, const Vec& x) const {
  const Node& n = nodes_[static_cast<std::size_t>(index)];
  if constexpr (std::is_same_v<S, double>) {
    switch (n.op) {
      case Op::kConst: return n.constant;
      case Op::kVar: return x[n.var];
      case Op::kAdd: return eval<S>(n.a, x) + eval<S>(n.b, x);
      case Op::kSub: return eval<S>(n.a, x) - eval<S>(n.b, x);
      case Op::kMul: return eval<S>(n.a, x) * eval<S>(n.b, x);
      case Op::kDiv: return eval<S>(n.a, x) / eval<S>(n.b, x);
      case Op::kPow: return dpow(eval<S>(n.a, x), eval<S>(n.b, x));
      case Op::kNeg: return -eval<S>(n.a, x);
      case Op::kExp: return std::exp(eval<S>(n.a, x));
      case Op::kLog: return std::log(eval<S>(n.a, x));
      case Op::kSqrt: return std::sqrt(eval<S>(n.a, x));
      case Op::kSin: return std::sin(eval<S>(n.a, x));
      case Op::kCos: return std::cos(eval<S>(n.a, x));
      case Op::kTanh: return std::tanh(eval<S>(n.a, x));
      case Op::kSinh: return std::sinh(eval<S>(n.a, x));
      case Op::kCosh: return std::cosh(eval<S>(n.a, x));
      case Op::kSmin: return smooth_min<double>(eval<S>(n.a, x), eval<S>(n.b, x), eval<S>(n.c, x));
      case Op::kSmax:
        return -smooth_min<double>(-eval<S>(n.a, x), -eval<S>(n.b, x), eval<S>(n.c, x));
    }
  } else {
    const int d = dim_;
    switch (n.op) {
      case Op::kConst: return Jet::constant(n.constant, d);
      case Op::kVar: return Jet::variable(x[n.var], n.var, d);
      case Op::kAdd: return eval<S>(n.a, x) + eval<S>(n.b, x);
      case Op::kSub: return eval<S>(n.a, x) - eval<S>(n.b, x);
      case Op::kMul: return eval<S>(n.a, x) * eval<S>(n.b, x);
      case Op::kDiv: return eval<S>(n.a, x) / eval<S>(n.b, x);
      case Op::kPow: return jpow(eval<S>(n.a, x), eval<S>(n.b, x));
      case Op::kNeg: return -eval<S>(n.a, x);
      case Op::kExp: return jexp(eval<S>(n.a, x));
      case Op::kLog: return jlog(eval<S>(n.a, x));
      case Op::kSqrt: return jsqrt(eval<S>(n.a, x));
      case Op::kSin: return jsin(eval<S>(n.a, x));
      case Op::kCos: return jcos(eval<S>(n.a, x));
      case Op::kTanh: return jtanh(eval<S>(n.a, x));
      case Op::kSinh: return jsinh(eval<S>(n.a, x));
      case Op::kCosh: return jcosh(eval<S>(n.a, x));
      case Op::kSmin: return smooth_min<Jet>(eval<S>(n.a, x), eval<S>(n.b, x), eval<S>(n.c, x));
      case Op::kSmax:
        return -smooth_min<Jet>(-eval<S>(n.a, x), -eval<S>(n.b, x), eval<S>(n.c, x));
    }
  }
  return S{};
}

double Expression::value(const Vec& x) const { return eval<double>(root_, x); }

Jet Expression::jet(const Vec& x) const { return eval<Jet>(root_, x); }

}  // namespace sticky
