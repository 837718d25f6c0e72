#include "sticky/oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace sticky;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent routes to the law of sticky Brownian motion from 0:
// P(X_T = 0) = e^{γ²T/2} erfc(γ√(T/2)) with γ = α₀/β₀ in the ½Δ convention.
double atom_ref(double g, double T) { return std::exp(0.5 * g * g * T) * std::erfc(g * std::sqrt(0.5 * T)); }

double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

}  // namespace

TEST_CASE("erfcx") {
  CHECK(erfcx(0.0) == 1.0);
  CHECK(erfcx(1.0) == doctest::Approx(std::exp(1.0) * std::erfc(1.0)).epsilon(1e-13));
  CHECK(erfcx(30.0) == doctest::Approx(1.0 / (30.0 * std::sqrt(kPi)) * (1 - 1.0 / 1800)).epsilon(1e-5));
}

TEST_CASE("closed forms are a probability law") {
  for (double g : {0.5, 1.0, 4.0}) {
    for (double T : {0.1, 1.0, 5.0}) {
      CAPTURE(g);
      CAPTURE(T);
      const double atom = sticky_atom(g, T);
      CHECK(atom == doctest::Approx(atom_ref(g, T)).epsilon(1e-12));
      CHECK(sticky_cdf(g, T, 0.0) == doctest::Approx(atom).epsilon(1e-12));
      // the density is continuous at 0+, where sticky_density itself returns 0
      const auto dens = [&](double y) { return sticky_density(g, T, std::max(y, 1e-300)); };
      const double mass = simpson(dens, 0.0, 12.0 * std::sqrt(T));
      CHECK(atom + mass == doctest::Approx(1.0).epsilon(1e-7));
      const double x = 0.7 * std::sqrt(T);
      CHECK(sticky_cdf(g, T, x) - atom == doctest::Approx(simpson(dens, 0.0, x)).epsilon(1e-8));
    }
  }
  CHECK(sticky_atom(1.0, 1e-12) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("reflected driver has E L_1 = sqrt(2/pi)") {
  RngStream rng(1, 0, substream::kOracle);
  const int n = 100000;
  double s = 0.0, s2 = 0.0, r = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_reflected_with_local_time(rng, {0.0, 0.5, 1.0});
    s += p.local_time.back();
    s2 += p.local_time.back() * p.local_time.back();
    r += p.path.back();
    REQUIRE(p.local_time[2] >= p.local_time[1]);
  }
  const double m = s / n, se = std::sqrt((s2 / n - m * m) / n);
  CHECK(std::abs(m - std::sqrt(2.0 / kPi)) < 4 * se);
  CHECK(std::abs(r / n - std::sqrt(2.0 / kPi)) < 4 * se);
}

TEST_CASE("exact sampler matches the closed form") {
  ExactSticky1D cfg;
  cfg.alpha0 = 2.0;
  cfg.beta0 = 1.0;
  cfg.horizon = 1.0;
  cfg.grid = {0.0, 0.25, 0.5, 1.0};
  RngStream rng(21, 0, substream::kOracle);
  std::vector<double> at_half, at_one;
  for (int i = 0; i < 50000; ++i) {
    const auto x = sample_sticky_1d(cfg, rng);
    at_half.push_back(x[2]);
    at_one.push_back(x[3]);
  }
  const double g = cfg.gamma();
  // 1.95/√n is the 0.1% KS critical value
  const double crit = 1.95 / std::sqrt(50000.0);
  CHECK(ks_statistic(at_half, [&](double x) { return sticky_cdf(g, 0.5, x); }, sticky_atom(g, 0.5)) < crit);
  CHECK(ks_statistic(at_one, [&](double x) { return sticky_cdf(g, 1.0, x); }, sticky_atom(g, 1.0)) < crit);
}

TEST_CASE("atom frequencies are unbiased across streams") {
  ExactSticky1D cfg;
  cfg.alpha0 = 2.0;
  cfg.grid = {0.0, 0.25, 0.5, 1.0};
  const double p = sticky_atom(2.0, 1.0);
  const int streams = 40, n = 5000;
  double zsum = 0.0;
  for (int s = 0; s < streams; ++s) {
    RngStream rng(77, static_cast<std::uint32_t>(s), substream::kOracle);
    int zeros = 0;
    for (int i = 0; i < n; ++i) zeros += sample_sticky_1d(cfg, rng).back() == 0.0;
    zsum += (zeros / double(n) - p) / std::sqrt(p * (1 - p) / n);
  }
  // the mean of 40 standard z-scores has standard deviation 1/√40
  CHECK(std::abs(zsum / streams) < 4.0 / std::sqrt(double(streams)));
}

TEST_CASE("zero boundary weight degenerates to reflection") {
  ExactSticky1D cfg;
  cfg.beta0 = 0.0;
  cfg.grid = {0.0, 1.0};
  RngStream a(5, 0, substream::kOracle), b(5, 0, substream::kOracle);
  const auto x = sample_sticky_1d(cfg, a);
  const auto r = sample_reflected_with_local_time(b, cfg.grid);
  CHECK(x.back() == r.path.back());
}

TEST_CASE("stickiness is visible in the atom") {
  ExactSticky1D cfg;
  cfg.grid = {0.0, 1.0};
  RngStream rng(6, 0, substream::kOracle);
  int zeros = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) zeros += sample_sticky_1d(cfg, rng).back() == 0.0;
  const double p = sticky_atom(1.0, 1.0);
  CHECK(p > 0.3);
  CHECK(std::abs(zeros / double(n) - p) < 4 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("KS statistics") {
  std::vector<double> u;
  for (int i = 0; i < 1000; ++i) u.push_back((i + 0.5) / 1000.0);
  CHECK(ks_statistic(u, [](double x) { return std::clamp(x, 0.0, 1.0); }, 0.0) == doctest::Approx(0.0005));
  CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(ks_two_sample({1, 2}, {3, 4}) == 1.0);
}

TEST_CASE("brute-force generator: constants and interior points") {
  Scenario s;
  s.geom = make_zoo_geometry("disk");
  s.pair = DensityPair::uniform(2);
  s.delta = 1;
  s.dt = 1e-4;
  s.seed = 31;
  s.start = Vec::Zero(2);
  const Vec x = (Vec(2) << 0.2, 0.1).finished();
  const auto one = brute_force_generator_check(make_test_function("1", 2), s, x, 0.01, 200);
  CHECK(one.estimate == 0.0);
  CHECK(one.residual == 0.0);
  // ½Δ|x|² = 2; the path stays inside up to a 1e-20 event
  const auto r2 = brute_force_generator_check(make_test_function("x1^2 + x2^2", 2), s, x, 0.01, 20000);
  CHECK(r2.generator == doctest::Approx(2.0));
  CHECK(std::abs(r2.residual) < 4 * r2.std_error);
}

TEST_CASE("brute-force generator at a boundary point converges to the sticky quotient") {
  // At x = (1, 0) with f = x1 the generator jumps across Γ (Lf = −x1 on Γ, 0 inside),
  // so (E f(X_h) − f(x))/h ≈ −(1/h)∫₀ʰ P(X_s ∈ Γ)ds rather than Lf(x) = −1. The
  // normal coordinate is sticky Brownian motion with γ = 1 to leading order.
  const double h = 0.01;
  const double reference = -simpson([](double t) { return atom_ref(1.0, t); }, 0.0, h) / h;
  CHECK(reference == doctest::Approx(-0.949).epsilon(1e-3));

  Scenario s;
  s.geom = make_zoo_geometry("disk");
  s.pair = DensityPair::uniform(2);
  s.delta = 1;
  s.seed = 3;
  s.start = Vec::Zero(2);
  const Vec x = (Vec(2) << 1.0, 0.0).finished();
  const auto f = make_test_function("x1", 2);

  s.scheme = SchemeKind::kTimeChange;
  s.dt = 1e-6;
  const auto a = brute_force_generator_check(f, s, x, h, 20000);
  CHECK(a.generator == doctest::Approx(-1.0));
  CHECK(std::abs(a.estimate - reference) < std::max(4 * a.std_error, 0.02));

  // The time-change scheme converges like √dt/h at a boundary start.
  s.dt = 1e-4;
  const auto coarse = brute_force_generator_check(f, s, x, h, 20000);
  CHECK(std::abs(coarse.estimate - reference) > std::abs(a.estimate - reference));

  s.scheme = SchemeKind::kDirectSticky;
  s.dt = 1e-5;
  const auto b = brute_force_generator_check(f, s, x, h, 20000);
  CHECK(std::abs(b.estimate - reference) < std::max(4 * b.std_error, 0.02));
}
