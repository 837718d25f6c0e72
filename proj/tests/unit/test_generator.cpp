#include "sticky/generator.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace sticky;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

}  // namespace

TEST_CASE("drift coefficients") {
  const auto g = make_zoo_geometry("disk");
  const auto flat = DensityPair::uniform(2);
  CHECK(drift_b(flat, *g, v2(0.2, 0.1), 1).norm() == 0.0);
  // boundary: ½(−(α/β)n − δκn) = −n for α = β = κ = δ = 1
  CHECK((drift_b(flat, *g, v2(1, 0), 1) - v2(-1, 0)).norm() < 1e-12);
  CHECK((drift_b(flat, *g, v2(1, 0), 0) - v2(-0.5, 0)).norm() < 1e-12);
  const auto gibbs = DensityPair::gibbs("x1", "1", 2);  // α = e^{−x1}: ½∇ln α = (−½, 0)
  CHECK((drift_b(gibbs, *g, v2(0.3, 0.2), 1) - v2(-0.5, 0)).norm() < 1e-12);
}

TEST_CASE("generator examples on the disk") {
  const auto g = make_zoo_geometry("disk");
  const auto pair = DensityPair::uniform(2);
  const auto r2 = make_test_function("x1^2 + x2^2", 2);
  const auto x1 = make_test_function("x1", 2);
  CHECK(apply_L(r2, pair, *g, v2(0.1, 0.2), 1) == doctest::Approx(2.0));  // ½Δ|x|² = d
  // on Γ: Δ_Γ|x|² = 0, (n, ∇|x|²) = 2
  CHECK(apply_L(r2, pair, *g, v2(0, 1), 1) == doctest::Approx(-1.0));
  // on Γ: Δ_Γ x1 = −x1, (n, ∇x1) = x1
  CHECK(apply_L(x1, pair, *g, v2(1, 0), 1) == doctest::Approx(-1.0));
  CHECK(apply_L(x1, pair, *g, v2(1, 0), 0) == doctest::Approx(-0.5));
}

TEST_CASE("interval generator") {
  const auto g = make_zoo_geometry("interval");
  const auto pair = DensityPair::uniform(1, 1.0, 2.0);
  const auto f = make_test_function("x^2", 1);
  CHECK(apply_L(f, pair, *g, Vec::Constant(1, 0.4), 0) == doctest::Approx(1.0));
  // x = 1: −½(α/β)(n, f') = −½·½·2
  CHECK(apply_L(f, pair, *g, Vec::Constant(1, 1.0), 0) == doctest::Approx(-0.5));
  CHECK(apply_L(f, pair, *g, Vec::Constant(1, 0.0), 0) == doctest::Approx(0.0));
}

TEST_CASE("Wentzell residual of a harmonic function") {
  // u = x1² − x2² on the unit disk: Δu = 0, Δ_Γ u = −4u, (n, ∇u) = 2u
  const auto g = make_zoo_geometry("disk");
  const auto u = make_test_function("x1^2 - x2^2", 2);
  const auto pair = DensityPair::uniform(2);
  const Vec x = v2(1, 0);
  CHECK(wentzell_residual(u, pair, *g, x, 1) == doctest::Approx(6.0));
  // doubling β halves the normal term
  CHECK(wentzell_residual(u, DensityPair::uniform(2, 1, 2), *g, x, 1) == doctest::Approx(5.0));
  CHECK(wentzell_residual(make_test_function("1", 2), pair, *g, x, 1) == 0.0);
}

TEST_CASE("Ito correction equals its finite-difference route") {
  for (const char* name : {"disk", "ball3", "ellipse(2,1)", "ellipsoid(1.5,1,0.75)"}) {
    CAPTURE(name);
    const auto g = make_zoo_geometry(name);
    const int d = g->dim();
    Vec u = Vec::Ones(d);
    u.normalize();
    const Vec x = project_to_boundary(*g, g->ray_radius(u) * u);
    const Vec exact = stratonovich_to_ito_drift(*g, x);
    CHECK((exact + 0.5 * mean_curvature(*g, x) * outward_normal(*g, x)).norm() < 1e-12);
    CHECK((stratonovich_to_ito_drift_fd(*g, x) - exact).norm() < 1e-6);
  }
}

TEST_CASE("diffusion matrix is a projector on the boundary") {
  const auto g = make_zoo_geometry("ellipsoid(1.5,1,0.75)");
  const auto pair = DensityPair::uniform(3);
  const CoefficientField c(pair, *g, 1);
  const Vec x = project_to_boundary(*g, (Vec(3) << 0.9, 0.7, 0.3).finished());
  const Coefficients b = c.at(x);
  CHECK(b.region == Region::kBoundary);
  CHECK((b.a * b.a - b.a).norm() < 1e-12);
  CHECK(CoefficientField(pair, *g, 0).at(x).a.norm() == 0.0);
  CHECK((c.at((Vec(3) << 0.1, 0, 0).finished()).a - Mat::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("compact and split forms agree on the bank") {
  const auto g = make_zoo_geometry("ellipse(2,1)");
  const auto pair = DensityPair::from_expressions("1 + 0.5*x1^2", "1.5 + 0.5*x2", 2);
  RngStream rng(2, 0);
  double worst = 0.0;
  for (const auto& f : test_bank(2)) {
    for (int k = 0; k < 40; ++k) {
      const double th = 2 * std::numbers::pi * rng.uniform();
      const Vec u = v2(std::cos(th), std::sin(th));
      Vec x = project_to_boundary(*g, g->ray_radius(u) * u);
      if (k % 2) x *= rng.uniform();
      for (int delta : {0, 1})
        worst = std::max(worst, std::abs(apply_L(f, pair, *g, x, delta) - apply_L_split(f, pair, *g, x, delta)));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("quadrature symmetry: ∫Lf·g dμ = −ℰ(f, g)") {
  const auto g = make_zoo_geometry("disk");
  const ReferenceMeasure m(DensityPair::from_expressions("1 + 0.3*x1", "1 + 0.2*x2^2", 2).with_bounds(1.3, 1.2),
                           g);
  const auto bank = test_bank(2);
  for (std::size_t i = 1; i + 1 < bank.size(); i += 2) {
    const auto& f = bank[i];
    const auto& h = bank[i + 1];
    CAPTURE(f.label);
    CAPTURE(h.label);
    for (int delta : {0, 1}) {
      const double e = dirichlet_form(m, f, h, delta);
      CHECK(std::abs(integrate_Lf_g(m, f, h, delta) + e) < 1e-3);
      CHECK(std::abs(integrate_Lf_g(m, h, f, delta) + e) < 1e-3);
    }
  }
}

TEST_CASE("constants are in the kernel") {
  const auto g = make_zoo_geometry("disk");
  const ReferenceMeasure m(DensityPair::uniform(2), g);
  const auto one = make_test_function("1", 2);
  for (const auto& f : test_bank(2)) CHECK(std::abs(integrate_Lf_g(m, f, one, 1)) < 1e-6);
}
