#include "sticky/field.hpp"

#include <fmt/format.h>

namespace sticky {

namespace {

class ConstantField final : public ScalarField {
 public:
  ConstantField(double c, int dim) : c_(c), dim_(dim) {}
  int dim() const override { return dim_; }
  double value(const Vec&) const override { return c_; }
  Vec gradient(const Vec&) const override { return Vec::Zero(dim_); }
  Mat hessian(const Vec&) const override { return Mat::Zero(dim_, dim_); }
  std::string describe() const override { return fmt::format("{}", c_); }
  std::optional<double> constant_value() const override { return c_; }

 private:
  double c_;
  int dim_;
};

class ExpressionField final : public ScalarField {
 public:
  explicit ExpressionField(Expression e) : e_(std::move(e)) {
    if (e_.is_constant()) c_ = e_.value(Vec::Zero(e_.dim()));
  }
  int dim() const override { return e_.dim(); }
  double value(const Vec& x) const override { return e_.value(x); }
  Vec gradient(const Vec& x) const override { return e_.jet(x).g; }
  Mat hessian(const Vec& x) const override { return e_.jet(x).h; }
  std::string describe() const override { return e_.source(); }
  std::optional<double> constant_value() const override { return c_; }

 private:
  Expression e_;
  std::optional<double> c_;
};

class FunctionField final : public ScalarField {
 public:
  FunctionField(FieldFunctions fns, int dim, std::string description)
      : fns_(std::move(fns)), dim_(dim), description_(std::move(description)) {}
  int dim() const override { return dim_; }
  double value(const Vec& x) const override { return fns_.value(x); }
  Vec gradient(const Vec& x) const override { return fns_.gradient(x); }
  Mat hessian(const Vec& x) const override { return fns_.hessian(x); }
  std::string describe() const override { return description_; }

 private:
  FieldFunctions fns_;
  int dim_;
  std::string description_;
};

}  // namespace

FieldPtr constant_field(double c, int dim) { return std::make_shared<ConstantField>(c, dim); }

FieldPtr expression_field(std::string_view source, int dim) {
  return std::make_shared<ExpressionField>(Expression::parse(source, dim));
}

FieldPtr function_field(FieldFunctions fns, int dim, std::string description) {
  return std::make_shared<FunctionField>(std::move(fns), dim, std::move(description));
}

Vec fd_gradient(const ScalarField& f, const Vec& x, double h) {
  const auto d = x.size();
  Vec g(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f.value(xp) - f.value(xm)) / (2.0 * h);
  }
  return g;
}

Mat fd_hessian(const ScalarField& f, const Vec& x, double h) {
  const auto d = x.size();
  Mat H(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    H.col(j) = (f.gradient(xp) - f.gradient(xm)) / (2.0 * h);
  }
  return H;
}

}  // namespace sticky
