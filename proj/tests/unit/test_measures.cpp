#include "sticky/measures.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace sticky;

namespace {

constexpr double kPi = std::numbers::pi;

double occupation(const char* geom, double alpha, double beta) {
  const auto g = make_zoo_geometry(geom);
  const ReferenceMeasure m(DensityPair::uniform(g->dim(), alpha, beta), g);
  return predicted_occupation_fraction(m);
}

}  // namespace

TEST_CASE("masses of the uniform pair") {
  struct Case {
    const char* geom;
    double volume, surface;
  };
  for (const Case c : {Case{"disk", kPi, 2 * kPi}, Case{"interval", 1.0, 2.0}, Case{"ball3", 4 * kPi / 3, 4 * kPi},
                       Case{"disk(2)", 4 * kPi, 4 * kPi}}) {
    CAPTURE(c.geom);
    const auto g = make_zoo_geometry(c.geom);
    const ReferenceMeasure m(DensityPair::uniform(g->dim()), g);
    const MassEstimate e = mu_masses(m);
    CHECK(e.volume == doctest::Approx(c.volume).epsilon(1e-9));
    CHECK(e.surface == doctest::Approx(c.surface).epsilon(1e-9));
  }
}

TEST_CASE("ellipse perimeter by quadrature") {
  // Ramanujan's second approximation is accurate to ~1e-10 relative for a/b = 2.
  const double a = 2.0, b = 1.0, h = (a - b) * (a - b) / ((a + b) * (a + b));
  const double perimeter = kPi * (a + b) * (1 + 3 * h / (10 + std::sqrt(4 - 3 * h)));
  const auto g = make_zoo_geometry("ellipse(2,1)");
  const ReferenceMeasure m(DensityPair::uniform(2), g);
  CHECK(mu_masses(m).volume == doctest::Approx(2 * kPi).epsilon(1e-9));
  CHECK(mu_masses(m).surface == doctest::Approx(perimeter).epsilon(1e-7));
}

TEST_CASE("occupation predictions") {
  CHECK(occupation("disk", 1, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(occupation("interval", 1, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(occupation("disk", 1, 0.5) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(occupation("ball3", 1, 1) == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("occupation grows with beta as c·S/(V + c·S)") {
  const auto g = make_zoo_geometry("ellipse(2,1)");
  const ReferenceMeasure base(DensityPair::from_expressions("1 + 0.3*x1", "2 + x2", 2).with_bounds(1.6, 3.0), g);
  const MassEstimate m0 = mu_masses(base);
  double last = 0.0;
  for (double c : {0.1, 0.5, 1.0, 4.0}) {
    const ReferenceMeasure m(base.pair().scaled_beta(c), g);
    const double p = predicted_occupation_fraction(m);
    CHECK(p == doctest::Approx(c * m0.surface / (m0.volume + c * m0.surface)).epsilon(1e-9));
    CHECK(p > last);
    last = p;
  }
}

TEST_CASE("component restriction on the split disk") {
  // α = β = x1² vanishes on {x1 = 0}; on the right half μ(Γ)/μ(G) = π/2 / (π/8 + π/2) = 0.8
  const auto g = make_zoo_geometry("disk");
  ZeroSet z;
  ZeroPrimitive plane;
  plane.kind = ZeroPrimitive::Kind::kPlane;
  plane.normal = (Vec(2) << 1, 0).finished();
  z.primitives.push_back(plane);
  const ComponentMap map(*g, z);
  CHECK(map.count() == 2);
  const ReferenceMeasure m(DensityPair::from_expressions("x1^2", "x1^2", 2).with_bounds(1, 1), g);
  const int right = map.component_of((Vec(2) << 0.5, 0).finished());
  CHECK(predicted_occupation_fraction(m, {&map, right}) == doctest::Approx(0.8).epsilon(1e-6));
}

TEST_CASE("condition levels are nested") {
  const auto g = make_zoo_geometry("disk");
  const auto pair = DensityPair::from_expressions("1 + x1^2", "2 + x2", 2);
  for (auto level : {ConditionLevel::kConstruction, ConditionLevel::kAnalysis, ConditionLevel::kFeller}) {
    const auto r = validate_conditions(pair, *g, level);
    CAPTURE(r.summary());
    CHECK(r.passed());
  }
  CHECK(validate_conditions(pair, *g, ConditionLevel::kFeller).checks.size() >
        validate_conditions(pair, *g, ConditionLevel::kConstruction).checks.size());
}

TEST_CASE("a jump in alpha fails continuity but not construction") {
  const auto g = make_zoo_geometry("disk");
  FieldFunctions step;
  step.value = [](const Vec& x) { return x[0] > 0.0 ? 2.0 : 1.0; };
  step.gradient = [](const Vec& x) { return Vec::Zero(x.size()); };
  step.hessian = [](const Vec& x) { return Mat::Zero(x.size(), x.size()); };
  const DensityPair pair(function_field(step, 2, "1 + [x1 > 0]"), constant_field(1.0, 2));
  CHECK(validate_conditions(pair, *g, ConditionLevel::kConstruction).passed());
  const auto r = validate_conditions(pair, *g, ConditionLevel::kAnalysis);
  REQUIRE(!r.passed());
  CHECK(r.first_failure()->name.find("continuity") != std::string::npos);
}

TEST_CASE("vanishing beta fails positivity") {
  const auto g = make_zoo_geometry("disk");
  const auto r = validate_conditions(DensityPair::uniform(2, 1.0, 0.0), *g, ConditionLevel::kConstruction);
  REQUIRE(!r.passed());
  CHECK(r.first_failure()->name.find("positivity") != std::string::npos);
}

TEST_CASE("capacity screen") {
  const auto g = make_zoo_geometry("disk");
  ZeroSet point;
  ZeroPrimitive p;
  p.kind = ZeroPrimitive::Kind::kPoint;
  p.center = Vec::Zero(2);
  point.primitives.push_back(p);
  // α = |x|² near a point zero: μ(B_r) ~ r⁴
  const ReferenceMeasure quartic(DensityPair::from_expressions("x1^2 + x2^2", "1", 2).with_bounds(1, 1), g);
  const auto ok = capacity_screen(quartic, point);
  CHECK(ok.pass);
  CHECK(ok.exponent == doctest::Approx(4.0).epsilon(0.05));
  // α = 1/|x|-like growth: μ(B_r) ~ r, too heavy for a polar set
  const ReferenceMeasure heavy(DensityPair::from_expressions("1/sqrt(x1^2 + x2^2 + 1e-12)", "1", 2), g);
  CHECK(!capacity_screen(heavy, point).pass);
}

TEST_CASE("invariant samples put the right mass on the boundary") {
  const auto g = make_zoo_geometry("disk");
  const ReferenceMeasure m(DensityPair::uniform(2), g);
  RngStream rng(3, 0, substream::kSampling);
  const std::size_t n = 60000;
  const auto s = sample_invariant(m, rng, n);
  double on = 0.0;
  std::array<double, 8> bins{};
  double r2 = 0.0;
  int interior = 0;
  for (const auto& x : s) {
    if (x.on_boundary) {
      on += 1.0;
      CHECK(std::abs(x.x.norm() - 1.0) < 1e-9);
      const double th = std::atan2(x.x[1], x.x[0]) + kPi;
      bins[std::min<std::size_t>(7, static_cast<std::size_t>(th / (2 * kPi) * 8))] += 1.0;
    } else {
      r2 += x.x.squaredNorm();
      ++interior;
    }
  }
  const double p = on / n;
  CHECK(std::abs(p - 2.0 / 3.0) < 4.0 * std::sqrt(2.0 / 9.0 / n));
  // uniform angles on Γ: χ² with 7 degrees of freedom, 99.99% quantile ≈ 29.9
  double chi2 = 0.0;
  for (double b : bins) chi2 += (b - on / 8) * (b - on / 8) / (on / 8);
  CHECK(chi2 < 29.9);
  // uniform in the disk: E|x|² = 1/2, Var = 1/12
  CHECK(std::abs(r2 / interior - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / interior));
}

TEST_CASE("non-constant densities need an envelope") {
  const auto g = make_zoo_geometry("disk");
  const ReferenceMeasure m(DensityPair::from_expressions("1 + x1^2", "1", 2), g);
  RngStream rng(1, 0);
  CHECK_THROWS_AS(sample_invariant_one(m, rng), EnvelopeUnknown);
}
