#include "sticky/observables.hpp"
#include "sticky/schemes.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace sticky;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

Scenario disk(SchemeKind k, double beta = 1.0) {
  Scenario s;
  s.geom = make_zoo_geometry("disk");
  s.pair = DensityPair::uniform(2, 1.0, beta);
  s.delta = 1;
  s.start = v2(0.9, 0.0);
  s.scheme = k;
  s.dt = 1e-3;
  s.horizon = 5.0;
  s.seed = 99;
  return s;
}

}  // namespace

TEST_CASE("interior Euler step") {
  const auto flat = DensityPair::uniform(2);
  const Vec y = step_interior(v2(0.1, 0.2), flat, 0.01, v2(1.0, -2.0));
  CHECK((y - v2(0.2, 0.0)).norm() < 1e-15);
  const auto gibbs = DensityPair::gibbs("x1", "1", 2);
  const Vec z = step_interior(v2(0, 0), gibbs, 0.01, v2(0, 0));
  CHECK((z - v2(-0.005, 0)).norm() < 1e-15);
}

TEST_CASE("reflected step mirrors in one dimension") {
  const auto g = make_zoo_geometry("interval");
  const auto flat = DensityPair::uniform(1);
  // 0.01 + 0.1·(−0.5) = −0.04 → 0.04
  const ReflectedStep r = reflected_step(Vec::Constant(1, 0.01), flat, *g, 0.01, Vec::Constant(1, -0.5));
  CHECK(r.contact);
  CHECK(r.state[0] == doctest::Approx(0.04));
  CHECK(r.dL == doctest::Approx(0.08));
  const ReflectedStep q = reflected_step(Vec::Constant(1, 0.5), flat, *g, 0.01, Vec::Constant(1, 1.0));
  CHECK(!q.contact);
  CHECK(q.dL == 0.0);
}

TEST_CASE("reflected step projects in the disk") {
  const auto g = make_zoo_geometry("disk");
  const ReflectedStep r = reflected_step(v2(0.95, 0.0), DensityPair::uniform(2), *g, 0.01, v2(1.5, 0.0));
  CHECK(r.contact);
  CHECK((r.state - v2(1.0, 0.0)).norm() < 1e-9);
  CHECK(r.dL == doctest::Approx(0.2).epsilon(1e-9));  // twice the 0.1 overshoot
}

TEST_CASE("surface step stays on the sphere") {
  const auto g = make_zoo_geometry("ball3");
  RngStream rng(4, 0);
  Vec x = (Vec(3) << 0, 0, 1).finished();
  for (int i = 0; i < 1000; ++i) {
    Vec xi(3);
    for (int k = 0; k < 3; ++k) xi[k] = rng.normal();
    x = surface_step(x, DensityPair::uniform(3), *g, 1e-3, xi, true);
    REQUIRE(std::abs(x.norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("path invariants of the time-change scheme") {
  Scenario s = disk(SchemeKind::kTimeChange);
  const Trajectory tr = run_path(s, 0);
  REQUIRE(!tr.aborted);
  REQUIRE(tr.size() == s.output_grid().size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(s.geom->level(tr.state(i)) <= s.geom->tolerances().boundary);
    if (i) {
      CHECK(tr.local_time[i] >= tr.local_time[i - 1]);
      CHECK(tr.boundary_time[i] >= tr.boundary_time[i - 1]);
      CHECK(tr.times[i] > tr.times[i - 1]);
    }
    if (tr.on_boundary[i]) CHECK(std::abs(s.geom->level(tr.state(i))) <= s.geom->tolerances().boundary);
  }
  for (std::size_t i = 1; i < tr.clock_map.size(); ++i) {
    CHECK(tr.clock_map[i].first > tr.clock_map[i - 1].first);
    CHECK(tr.clock_map[i].second > tr.clock_map[i - 1].second);
  }
  // A_t = t + ∫β dL: boundary time equals β·L for constant β
  CHECK(tr.boundary_time.back() == doctest::Approx(tr.local_time.back()).epsilon(1e-6));
  CHECK(tr.stats.boundary_events > 0);
}

TEST_CASE("paths are reproducible and independent of the worker count") {
  Scenario s = disk(SchemeKind::kTimeChange);
  s.n_paths = 4;
  s.horizon = 1.0;
  const auto one = run_ensemble(s, 1);
  const auto two = run_ensemble(s, 2);
  for (int p = 0; p < 4; ++p) {
    CHECK(one[p].coords == two[p].coords);
    CHECK(one[p].on_boundary == two[p].on_boundary);
  }
  CHECK(run_path(s, 2).coords == one[2].coords);
  CHECK(one[0].coords != one[1].coords);
}

TEST_CASE("direct scheme that never leaves is surface motion") {
  Scenario s = disk(SchemeKind::kDirectSticky);
  s.start = v2(1.0, 0.0);
  s.h_stick = 1e300;  // leave probability underflows to zero
  s.horizon = 2.0;
  Scenario t = s;
  t.scheme = SchemeKind::kSurfaceOnly;
  const Trajectory a = run_path(s, 0), b = run_path(t, 0);
  CHECK(a.coords == b.coords);
  for (auto f : a.on_boundary) CHECK(f == 1);
}

TEST_CASE("zero beta gives no boundary time") {
  Scenario s = disk(SchemeKind::kTimeChange, 0.0);
  s.horizon = 20.0;
  const Trajectory tr = run_path(s, 0);
  REQUIRE(!tr.aborted);
  CHECK(tr.boundary_time.back() == 0.0);
  CHECK(tr.local_time.back() > 0.0);
  for (auto f : tr.on_boundary) CHECK(f == 0);
}

TEST_CASE("angle increments of circle motion have variance t") {
  Scenario s = disk(SchemeKind::kSurfaceOnly);
  s.start = v2(1, 0);
  s.dt = 1e-4;
  s.horizon = 0.5;
  s.output_times = {0.0, 0.5};
  s.n_paths = 2000;
  const auto th = map_paths(s, [](const Trajectory& tr) {
    const Vec x = tr.state(tr.size() - 1);
    return std::atan2(x[1], x[0]);
  });
  double m = 0.0, m2 = 0.0;
  for (double v : th) {
    m += v;
    m2 += v * v;
  }
  m /= th.size();
  m2 /= th.size();
  // wrapping is negligible: P(|θ| > π) ≈ 1e-8
  CHECK(std::abs(m) < 4.0 * std::sqrt(0.5 / th.size()));
  CHECK(std::abs(m2 - 0.5) < 4.0 * 0.5 * std::sqrt(2.0 / th.size()));
}

TEST_CASE("paths stay in the start component of the split disk") {
  Scenario s = disk(SchemeKind::kTimeChange);
  s.pair = DensityPair::from_expressions("x1^2", "x1^2", 2).with_bounds(1, 1);
  ZeroPrimitive plane;
  plane.kind = ZeroPrimitive::Kind::kPlane;
  plane.normal = v2(1, 0);
  s.zeros.primitives.push_back(plane);
  s.start = v2(0.5, 0.0);
  s.horizon = 20.0;
  for (auto k : {SchemeKind::kTimeChange, SchemeKind::kDirectSticky}) {
    s.scheme = k;
    const Trajectory tr = run_path(s, 0);
    REQUIRE(!tr.aborted);
    for (std::size_t i = 0; i < tr.size(); ++i) REQUIRE(tr.state(i)[0] > 0.0);
  }
}

TEST_CASE("scenario rules") {
  Scenario s = disk(SchemeKind::kTimeChange);
  s.dt = -1.0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  Scenario t = disk(SchemeKind::kTimeChange);
  t.start = v2(2.0, 0.0);
  CHECK_THROWS_AS(t.validate(), ValidationError);
  Scenario u;
  u.geom = make_zoo_geometry("interval");
  u.start = Vec::Constant(1, 0.5);
  u.delta = 1;
  CHECK_THROWS_AS(u.validate(), ValidationError);
  CHECK(parse_scheme("direct_sticky") == SchemeKind::kDirectSticky);
  CHECK(to_string(SchemeKind::kSurfaceOnly) == "surface_only");
}
