#pragma once

#include "sticky/field.hpp"
#include "sticky/geometry.hpp"
#include "sticky/measures.hpp"

#include <string>
#include <vector>

namespace sticky {

/// A C² function with analytic derivatives, labelled for reports.
struct TestFunction {
  std::string label;
  FieldPtr field;

  double value(const Vec& x) const { return field->value(x); }
  Vec gradient(const Vec& x) const { return field->gradient(x); }
  Mat hessian(const Vec& x) const { return field->hessian(x); }
};

/// Test function from the expression grammar; the label defaults to the source.
TestFunction make_test_function(std::string_view source, int dim, std::string label = {});

/// Coordinates, quadratics, |x|², exponentials and bump products.
std::vector<TestFunction> test_bank(int dim);

enum class Region { kInterior, kBoundary };

struct Coefficients {
  Region region = Region::kInterior;
  Mat a;  ///< A = E inside, δP on Γ
  Vec b;
};

/// A(x), b(x) of the compact generator form. Points with |F| ≤ ε_Γ are boundary points.
class CoefficientField {
 public:
  CoefficientField(const DensityPair& pair, const DomainGeometry& geom, int delta);

  Region region(const Vec& x) const;
  Coefficients at(const Vec& x) const;
  Coefficients at(const Vec& x, Region region) const;
  int delta() const { return delta_; }

 private:
  const DensityPair* pair_;
  const DomainGeometry* geom_;
  int delta_;
};

/// Interior: ½∇ln α. Boundary: ½(δP∇ln β − (α/β)n − δκn).
Vec drift_b(const DensityPair& pair, const DomainGeometry& geom, const Vec& x, int delta);

/// ½Tr(A∇²f) + (b, ∇f) with the region taken from x.
double apply_L(const TestFunction& f, const DensityPair& pair, const DomainGeometry& geom, const Vec& x,
               int delta);
/// Compact form with the region forced (quadrature nodes, scheme flags).
double apply_L(const TestFunction& f, const DensityPair& pair, const DomainGeometry& geom, const Vec& x,
               int delta, Region region);

/// ½(Δf + (∇ln α, ∇f)).
double apply_L_interior(const TestFunction& f, const DensityPair& pair, const Vec& x);
/// ½(δΔ_Γ f + δ(∇_Γ ln β, ∇_Γ f) − (α/β)(n, ∇f)).
double apply_L_boundary(const TestFunction& f, const DensityPair& pair, const DomainGeometry& geom, const Vec& x,
                        int delta);
/// Split form with the region taken from x.
double apply_L_split(const TestFunction& f, const DensityPair& pair, const DomainGeometry& geom, const Vec& x,
                     int delta);

/// Δu + (∇ln α, ∇u) − δΔ_Γ u − δ(∇_Γ ln β, ∇_Γ u) + (α/β)(n, ∇u) at x ∈ Γ.
double wentzell_residual(const TestFunction& u, const DensityPair& pair, const DomainGeometry& geom, const Vec& x,
                         int delta);

/// ½((P∇)ᵀP)(x) = −½κn at x ∈ Γ.
Vec stratonovich_to_ito_drift(const DomainGeometry& geom, const Vec& x);
/// Same quantity from central differences of the extended P field.
Vec stratonovich_to_ito_drift_fd(const DomainGeometry& geom, const Vec& x, double h = 0.0);

/// ℰ(f, g) = ½∫_Ω(∇f, ∇g)α dλ + (δ/2)∫_Γ(∇_Γ f, ∇_Γ g)β dσ.
double dirichlet_form(const ReferenceMeasure& measure, const TestFunction& f, const TestFunction& g, int delta);
/// ∫ Lf · g dμ by the same quadrature.
double integrate_Lf_g(const ReferenceMeasure& measure, const TestFunction& f, const TestFunction& g, int delta);

}  // namespace sticky
