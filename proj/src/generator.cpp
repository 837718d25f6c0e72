#include "sticky/generator.hpp"

#include <fmt/format.h>

namespace sticky {

TestFunction make_test_function(std::string_view source, int dim, std::string label) {
  if (label.empty()) label = std::string(source);
  return {std::move(label), expression_field(source, dim)};
}

std::vector<TestFunction> test_bank(int dim) {
  std::vector<std::string> src;
  if (dim == 1) {
    src = {"1", "x1", "x1^2", "exp(0.5*x1)", "sin(2*x1)", "x1*exp(-x1^2)"};
  } else if (dim == 2) {
    src = {"1",           "x1",          "x2",          "x1*x2", "x1^2+x2^2", "x1^2-x2^2", "exp(0.5*x1)",
           "sin(x1)*cos(x2)", "x1*exp(-(x1^2+x2^2))"};
  } else {
    src = {"1",           "x1",          "x3",          "x1*x2", "x2*x3", "x1^2+x2^2+x3^2", "x3^2-x1^2",
           "exp(0.5*x1)", "sin(x1)*cos(x3)", "x2*exp(-(x1^2+x2^2+x3^2))"};
  }
  std::vector<TestFunction> bank;
  for (const auto& s : src) bank.push_back(make_test_function(s, dim));
  return bank;
}

// -------------------------------------------------------------------------

namespace {

void require_alpha(const DensityPair& pair, const Vec& x) {
  if (!(pair.alpha(x) > kDensityFloor)) throw ZeroAlpha("α vanishes at an interior point; drift undefined");
}

void require_beta(const DensityPair& pair, const Vec& x) {
  if (!(pair.beta(x) > kDensityFloor)) throw ZeroBeta("β vanishes at a boundary point; drift undefined");
}

Region classify(const DomainGeometry& geom, const Vec& x) {
  return geom.on_boundary(x) ? Region::kBoundary : Region::kInterior;
}

Vec boundary_drift(const DensityPair& pair, const Vec& x, int delta, const BoundaryFrame& fr) {
  require_beta(pair, x);
  Vec b = -(pair.alpha(x) / pair.beta(x)) * fr.normal;
  if (delta == 1) b += fr.projection * pair.grad_log_beta(x) - fr.curvature * fr.normal;
  return 0.5 * b;
}

}  // namespace

CoefficientField::CoefficientField(const DensityPair& pair, const DomainGeometry& geom, int delta)
    : pair_(&pair), geom_(&geom), delta_(delta) {
  if (delta != 0 && delta != 1) throw ValidationError("δ must be 0 or 1");
}

Region CoefficientField::region(const Vec& x) const { return classify(*geom_, x); }

Coefficients CoefficientField::at(const Vec& x) const { return at(x, region(x)); }

Coefficients CoefficientField::at(const Vec& x, Region region) const {
  const int d = geom_->dim();
  Coefficients c;
  c.region = region;
  if (region == Region::kInterior) {
    require_alpha(*pair_, x);
    c.a = Mat::Identity(d, d);
    c.b = 0.5 * pair_->grad_log_alpha(x);
    return c;
  }
  const BoundaryFrame fr = boundary_frame(*geom_, x);
  c.a = delta_ == 1 ? fr.projection : Mat::Zero(d, d);
  c.b = boundary_drift(*pair_, x, delta_, fr);
  return c;
}

Vec drift_b(const DensityPair& pair, const DomainGeometry& geom, const Vec& x, int delta) {
  return CoefficientField(pair, geom, delta).at(x).b;
}

double apply_L(const TestFunction& f, const DensityPair& pair, const DomainGeometry& geom, const Vec& x, int delta,
               Region region) {
  const Coefficients c = CoefficientField(pair, geom, delta).at(x, region);
  return 0.5 * (c.a * f.hessian(x)).trace() + c.b.dot(f.gradient(x));
}

double apply_L(const TestFunction& f, const DensityPair& pair, const DomainGeometry& geom, const Vec& x,
               int delta) {
  return apply_L(f, pair, geom, x, delta, classify(geom, x));
}

double apply_L_interior(const TestFunction& f, const DensityPair& pair, const Vec& x) {
  require_alpha(pair, x);
  return 0.5 * (f.hessian(x).trace() + pair.grad_log_alpha(x).dot(f.gradient(x)));
}

double apply_L_boundary(const TestFunction& f, const DensityPair& pair, const DomainGeometry& geom, const Vec& x,
                        int delta) {
  require_beta(pair, x);
  const Vec n = outward_normal(geom, x);
  double v = -(pair.alpha(x) / pair.beta(x)) * n.dot(f.gradient(x));
  if (delta == 1) {
    v += laplace_beltrami(geom, *f.field, x) +
         surface_gradient(geom, pair.beta_field(), x).dot(surface_gradient(geom, *f.field, x)) / pair.beta(x);
  }
  return 0.5 * v;
}

double apply_L_split(const TestFunction& f, const DensityPair& pair, const DomainGeometry& geom, const Vec& x,
                     int delta) {
  return classify(geom, x) == Region::kInterior ? apply_L_interior(f, pair, x)
                                                : apply_L_boundary(f, pair, geom, x, delta);
}

double wentzell_residual(const TestFunction& u, const DensityPair& pair, const DomainGeometry& geom, const Vec& x,
                         int delta) {
  require_alpha(pair, x);
  // Interior operator continued to Γ, minus twice the boundary operator.
  const double interior = u.hessian(x).trace() + pair.grad_log_alpha(x).dot(u.gradient(x));
  return interior - 2.0 * apply_L_boundary(u, pair, geom, x, delta);
}

Vec stratonovich_to_ito_drift(const DomainGeometry& geom, const Vec& x) {
  const BoundaryFrame fr = boundary_frame(geom, x);
  return -0.5 * fr.curvature * fr.normal;
}

Vec stratonovich_to_ito_drift_fd(const DomainGeometry& geom, const Vec& x, double h) {
  const BoundaryFrame fr = boundary_frame(geom, x);
  // residual = FD((P∇)ᵀP) + κn
  return 0.5 * (curvature_identity_residual(geom, x, h) - fr.curvature * fr.normal);
}

double dirichlet_form(const ReferenceMeasure& measure, const TestFunction& f, const TestFunction& g, int delta) {
  const auto& geom = measure.geometry();
  double e = 0.5 * measure.integrate_volume([&](const Vec& x) { return f.gradient(x).dot(g.gradient(x)); });
  if (delta == 1 && geom.dim() >= 2) {
    e += 0.5 * measure.integrate_surface([&](const Vec& x) {
      return surface_gradient(geom, *f.field, x).dot(surface_gradient(geom, *g.field, x));
    });
  }
  return e;
}

double integrate_Lf_g(const ReferenceMeasure& measure, const TestFunction& f, const TestFunction& g, int delta) {
  const auto& pair = measure.pair();
  const auto& geom = measure.geometry();
  return measure.integrate_volume([&](const Vec& x) { return apply_L_interior(f, pair, x) * g.value(x); }) +
         measure.integrate_surface(
             [&](const Vec& x) { return apply_L_boundary(f, pair, geom, x, delta) * g.value(x); });
}

}  // namespace sticky
