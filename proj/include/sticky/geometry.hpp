#pragma once

#include "sticky/field.hpp"
#include "sticky/types.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace sticky {

struct GeometryTolerances {
  double boundary = 0.0;          ///< ε_Γ: |F(x)| ≤ boundary counts as on Γ
  double fd_step = 0.0;           ///< finite-difference step for verification routines
  double grad_floor = 1e-12;      ///< |∇F| below this is degenerate
  double projection_basin = 0.0;  ///< max Newton distance estimate |F|/|∇F| accepted by projection
  int max_newton = 50;
};

/// Ω = {F < 0}, Γ = {F = 0} for a smooth level function F on R^d.
///
/// Immutable after construction. For d ≥ 2 the domain is expected to be
/// star-shaped about `center()`, which is what the quadrature and boundary
/// samplers rely on.
class DomainGeometry {
 public:
  DomainGeometry(FieldPtr level, Vec bbox_lo, Vec bbox_hi, std::string name, Vec center);

  int dim() const noexcept { return dim_; }
  const std::string& name() const noexcept { return name_; }
  const Vec& bbox_lo() const noexcept { return lo_; }
  const Vec& bbox_hi() const noexcept { return hi_; }
  const Vec& center() const noexcept { return center_; }
  double diameter() const noexcept { return (hi_ - lo_).norm(); }
  const ScalarField& level_field() const noexcept { return *level_; }
  const FieldPtr& level_ptr() const noexcept { return level_; }

  double level(const Vec& x) const { return level_->value(x); }
  Vec level_gradient(const Vec& x) const { return level_->gradient(x); }
  Mat level_hessian(const Vec& x) const { return level_->hessian(x); }

  const GeometryTolerances& tolerances() const noexcept { return tol_; }
  /// Returns a copy with different tolerances; zero entries keep the defaults.
  std::shared_ptr<const DomainGeometry> with_tolerances(const GeometryTolerances& tol) const;

  bool on_boundary(const Vec& x) const { return std::abs(level(x)) <= tol_.boundary; }
  bool in_closure(const Vec& x) const { return level(x) <= tol_.boundary; }

  /// Endpoints (a, b) when d = 1.
  std::pair<double, double> interval() const;

  /// Distance from center() to Γ along the unit direction `dir`.
  double ray_radius(const Vec& dir) const;

  /// Outward normal field ∇F/|∇F| extended off Γ; no on-boundary check.
  Vec normal_field(const Vec& x) const;
  /// E − n nᵀ of the extended normal field.
  Mat projection_field(const Vec& x) const;
  /// Tr(P ∇n) of the extended normal field.
  double curvature_field(const Vec& x) const;

 private:
  FieldPtr level_;
  Vec lo_, hi_, center_;
  std::string name_;
  int dim_;
  GeometryTolerances tol_;
  std::pair<double, double> ends_{0.0, 0.0};
};

using GeometryPtr = std::shared_ptr<const DomainGeometry>;

struct BoundaryFrame {
  Vec point;
  Vec normal;
  Mat projection;
  double curvature = 0.0;
};

/// Unit outward normal at x ∈ Γ. Throws NotOnBoundary / DegenerateGradient.
Vec outward_normal(const DomainGeometry& geom, const Vec& x);
Mat tangent_projection(const DomainGeometry& geom, const Vec& x);
/// κ = div_Γ n = Tr(P ∇²F)/|∇F|. Zero for d = 1.
double mean_curvature(const DomainGeometry& geom, const Vec& x);
BoundaryFrame boundary_frame(const DomainGeometry& geom, const Vec& x);

Vec surface_gradient(const DomainGeometry& geom, const ScalarField& f, const Vec& x);
/// Δ_Γ f = Tr(P ∇²f) − κ (n, ∇f).
double laplace_beltrami(const DomainGeometry& geom, const ScalarField& f, const Vec& x);

/// ((P∇)ᵀP)(x) + κ(x) n(x), the first term by central differences of the
/// extended P field with step h (0 selects the geometry default).
Vec curvature_identity_residual(const DomainGeometry& geom, const Vec& x, double h = 0.0);

/// κ computed as Tr(P · J) where J is a central-difference Jacobian of n.
double fd_mean_curvature(const DomainGeometry& geom, const Vec& x, double h = 0.0);

/// Newton iteration along ∇F onto Γ; result has |F| ≤ 1e-3 ε_Γ.
/// Throws ProjectionDiverged outside the basin or after max_newton steps.
Vec project_to_boundary(const DomainGeometry& geom, const Vec& x);

/// Built-in surfaces: "interval", "interval(b)", "interval(a,b)", "disk",
/// "disk(r)", "ball3", "ball3(r)", "ellipse(a,b)", "ellipsoid(a,b,c)",
/// "smoothbox(r)", "smoothbox(r,d)". Throws ParseError on unknown names.
GeometryPtr make_zoo_geometry(std::string_view spec);

/// Custom level set from the expression grammar.
GeometryPtr make_expression_geometry(std::string_view level, int dim, const Vec& bbox_lo,
                                     const Vec& bbox_hi, std::optional<Vec> center = std::nullopt);

}  // namespace sticky
