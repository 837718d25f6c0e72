#pragma once

#include "sticky/expr.hpp"
#include "sticky/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace sticky {

/// A C² scalar field on R^d with analytic first and second derivatives.
class ScalarField {
 public:
  virtual ~ScalarField() = default;

  virtual int dim() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  virtual Mat hessian(const Vec& x) const = 0;
  virtual std::string describe() const = 0;

  /// Set when the field is constant; lets hot loops skip derivative work.
  virtual std::optional<double> constant_value() const { return std::nullopt; }
};

using FieldPtr = std::shared_ptr<const ScalarField>;

FieldPtr constant_field(double c, int dim);

/// Throws ParseError on malformed source.
FieldPtr expression_field(std::string_view source, int dim);

struct FieldFunctions {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
};

FieldPtr function_field(FieldFunctions fns, int dim, std::string description);

/// Central finite-difference gradient of `f` with step h.
Vec fd_gradient(const ScalarField& f, const Vec& x, double h);

/// Central finite differences of the analytic gradient.
Mat fd_hessian(const ScalarField& f, const Vec& x, double h);

}  // namespace sticky
