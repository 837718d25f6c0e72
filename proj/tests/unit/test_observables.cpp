#include "sticky/observables.hpp"

#include <doctest.h>

#include <cmath>

using namespace sticky;

namespace {

Scenario disk(SchemeKind k) {
  Scenario s;
  s.geom = make_zoo_geometry("disk");
  s.pair = DensityPair::uniform(2);
  s.delta = 1;
  s.start = Vec::Zero(2);
  s.scheme = k;
  s.dt = 1e-3;
  s.seed = 5;
  return s;
}

// Hand-made trajectory on a grid of step h with the given boundary flags.
Trajectory flags_path(const std::vector<int>& flags, double h) {
  Trajectory tr;
  tr.dim = 1;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    tr.times.push_back(i * h);
    tr.coords.push_back(flags[i] ? 0.0 : 0.5);
    tr.on_boundary.push_back(static_cast<std::uint8_t>(flags[i]));
    tr.local_time.push_back(0.0);
    tr.boundary_time.push_back(0.0);
  }
  return tr;
}

}  // namespace

TEST_CASE("surface motion has occupation fraction one") {
  Scenario s = disk(SchemeKind::kSurfaceOnly);
  s.start = (Vec(2) << 1, 0).finished();
  s.horizon = 10.0;
  const auto r = occupation_fraction(run_path(s, 0), default_window(s.horizon));
  CHECK(r.estimate == 1.0);
  CHECK(r.std_error == 0.0);
}

TEST_CASE("time-weighted average of a hand-made path") {
  // 1000 samples, boundary on every fourth: fraction 1/4 exactly
  std::vector<int> f(1000);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = i % 4 == 0;
  const auto r = occupation_fraction(flags_path(f, 0.01), {0.0, 10.0});
  CHECK(r.estimate == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("pooling is the concatenation of the windows") {
  std::vector<int> a(1200), b(1200);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = (i / 7) % 3 == 0;
    b[i] = (i / 5) % 2 == 0;
  }
  const Trajectory ta = flags_path(a, 0.01), tb = flags_path(b, 0.01);
  const Window w{0.0, 12.0};
  const auto ra = occupation_fraction(ta, w), rb = occupation_fraction(tb, w);
  const auto pooled = occupation_fraction(std::vector<Trajectory>{ta, tb}, w);
  CHECK(pooled.estimate == doctest::Approx(0.5 * (ra.estimate + rb.estimate)).epsilon(1e-12));
}

TEST_CASE("ergodic averages are linear in the function") {
  Scenario s = disk(SchemeKind::kTimeChange);
  s.horizon = 20.0;
  s.dt_out = 0.01;
  const Trajectory tr = run_path(s, 0);
  const Window w = default_window(s.horizon);
  const auto f = make_test_function("x1", 2), g = make_test_function("x1^2 + x2^2", 2);
  const auto h = make_test_function("2*x1 - 3*(x1^2 + x2^2)", 2);
  const double lhs = ergodic_average(tr, h, w).estimate;
  const double rhs = 2 * ergodic_average(tr, f, w).estimate - 3 * ergodic_average(tr, g, w).estimate;
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("windows too short for batch means are refused") {
  std::vector<int> f(100, 1);
  CHECK_THROWS_AS(occupation_fraction(flags_path(f, 0.01), {0.0, 1.0}), WindowTooShort);
}

TEST_CASE("verdicts") {
  ObservableReport r;
  r.estimate = 1.0;
  r.std_error = 0.1;
  CHECK(r.against(1.35, "", 4.0).verdict);
  CHECK(!r.against(1.45, "", 4.0).verdict);
  CHECK(r.against(1.45, "", 4.0, 0.5).verdict);
  CHECK(r.lower_bound() == doctest::Approx(0.6));
}

TEST_CASE("batch-means intervals cover the exact mean of a telegraph process") {
  // Two-state chain with rates a (0 → 1) and b (1 → 0), started stationary and
  // sampled exactly on a grid: the occupation of state 1 has mean a/(a + b).
  // The 2σ batch-means interval should cover it in about 95% of repetitions.
  const double a = 1.0, b = 2.0, h = 0.05, horizon = 200.0;
  const double pi1 = a / (a + b);
  const double stay = std::exp(-(a + b) * h);
  const double p01 = pi1 * (1 - stay), p10 = (1 - pi1) * (1 - stay);
  int covered = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    RngStream rng(4242, static_cast<std::uint32_t>(r), substream::kSampling);
    Trajectory tr;
    tr.dim = 1;
    int state = rng.uniform() < pi1;
    for (int i = 0; i * h <= horizon + 1e-9; ++i) {
      tr.times.push_back(i * h);
      tr.coords.push_back(state);
      tr.on_boundary.push_back(static_cast<std::uint8_t>(state));
      const double u = rng.uniform();
      state = state ? (u < p10 ? 0 : 1) : (u < p01 ? 1 : 0);
    }
    const auto rep = occupation_fraction(tr, {0.0, horizon});
    covered += std::abs(rep.estimate - pi1) <= 2 * rep.std_error;
  }
  CHECK(covered >= 0.9 * reps);
  CHECK(covered <= reps);
}

TEST_CASE("stickiness verdict separates the control pair") {
  Scenario s = disk(SchemeKind::kTimeChange);
  s.horizon = 200.0;
  s.dt_out = 0.01;
  s.n_paths = 2;
  const Window w{10.0, s.horizon};
  const auto sticky = stickiness_verdict(run_ensemble(s, 1), w);
  CHECK(sticky.sticky);
  CHECK(sticky.occupation.lower_bound() > 0.5);
  Scenario z = s;
  z.pair = DensityPair::uniform(2, 1.0, 0.0);
  const auto plain = stickiness_verdict(run_ensemble(z, 1), w);
  CHECK(!plain.sticky);
  CHECK(plain.occupation.estimate < 0.01);
}

TEST_CASE("martingale increment of a constant is zero and of |x|² matches Itô") {
  Scenario s = disk(SchemeKind::kTimeChange);
  s.horizon = 1.0;
  const Trajectory tr = run_path(s, 0);
  CHECK(martingale_increment(tr, make_test_function("1", 2), s) == 0.0);
  const double m = martingale_increment(tr, make_test_function("x1^2 + x2^2", 2), s, 0.2, 0.6);
  CHECK(std::isfinite(m));
}

TEST_CASE("residual suite with stationary starts") {
  Scenario s = disk(SchemeKind::kTimeChange);
  s.dt = 1e-4;
  s.horizon = 0.01;
  s.n_paths = 20000;
  std::vector<TestFunction> bank{make_test_function("1", 2), make_test_function("x1", 2),
                                 make_test_function("x1^2 + x2^2", 2), make_test_function("x1*x2", 2)};
  ResidualOptions o;
  o.martingale_from_mu = true;
  for (const auto& r : residual_suite(s, bank, o)) {
    CAPTURE(r.name);
    CAPTURE(r.estimate);
    CAPTURE(r.std_error);
    CHECK(r.verdict);
  }
  o.martingale_offset = 0.02;
  CHECK_THROWS_AS(residual_suite(s, bank, o), ValidationError);
}
