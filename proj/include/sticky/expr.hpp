#pragma once

#include "sticky/types.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace sticky {

/// Value, gradient and Hessian of a scalar function at one point.
struct Jet {
  double v = 0.0;
  Vec g;
  Mat h;

  static Jet constant(double c, int dim);
  static Jet variable(double value, int index, int dim);
};

/// Scalar expressions over the coordinates of R^d.
///
/// Grammar: numbers, `+ - * / ^`, parentheses, the coordinates `x y z`
/// (or `x1 x2 x3`), the constants `pi` and `e`, and the functions
/// `exp log sqrt sin cos tanh sinh cosh pow(a,b) smin(a,b,k) smax(a,b,k)`.
/// `smin`/`smax` are the log-sum-exp smoothed minimum/maximum with width k.
/// Derivatives are propagated exactly in forward mode.
class Expression {
 public:
  /// Throws ParseError (line 1, 1-based column) on malformed input, or when a
  /// coordinate index exceeds `dim`.
  static Expression parse(std::string_view source, int dim);

  double value(const Vec& x) const;
  Jet jet(const Vec& x) const;

  int dim() const noexcept { return dim_; }
  const std::string& source() const noexcept { return source_; }
  bool is_constant() const noexcept;

  enum class Op {
    kConst, kVar, kAdd, kSub, kMul, kDiv, kPow, kNeg,
    kExp, kLog, kSqrt, kSin, kCos, kTanh, kSinh, kCosh, kSmin, kSmax
  };

  struct Node {
    Op op = Op::kConst;
    double constant = 0.0;
    int var = -1;
    int a = -1;
    int b = -1;
    int c = -1;
  };

 private:
  template <class S>
  S eval(int node, const Vec& x) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  int dim_ = 0;
  std::string source_;

  friend class ExpressionParser;
};

}  // namespace sticky
