#include "sticky/oracle.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sticky {

void ExactSticky1D::validate() const {
  if (!(alpha0 > 0.0) || !(beta0 >= 0.0)) throw ValidationError("oracle needs α₀ > 0 and β₀ ≥ 0");
  if (!(horizon > 0.0)) throw ValidationError("oracle horizon must be positive");
  if (start < 0.0) throw ValidationError("oracle start must be in [0, ∞)");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ValidationError("oracle grid must be increasing");
  if (!grid.empty() && grid.front() < 0.0) throw ValidationError("oracle grid starts before 0");
}

ReflectedPath sample_reflected_with_local_time(RngStream& rng, const std::vector<double>& grid) {
  ReflectedPath out;
  out.path.reserve(grid.size());
  out.local_time.reserve(grid.size());
  double b = 0.0, s = 0.0, t = 0.0;
  for (const double tk : grid) {
    const double h = tk - t;
    if (h > 0.0) {
      const double next = b + std::sqrt(h) * rng.normal();
      const double m = 0.5 * (b + next + std::sqrt((next - b) * (next - b) - 2.0 * h * std::log(rng.uniform())));
      s = std::max(s, m);
      b = next;
      t = tk;
    }
    out.path.push_back(s - b);
    out.local_time.push_back(s);
  }
  return out;
}

double erfcx(double z) {
  if (z < 25.0) return std::exp(z * z) * std::erfc(z);
  const double iz2 = 1.0 / (z * z);
  return (1.0 - 0.5 * iz2 * (1.0 - 1.5 * iz2 * (1.0 - 2.5 * iz2))) / (z * std::sqrt(std::numbers::pi));
}

namespace {

// G(x) = exp(γx + γ²T/2) erfc(x/√(2T) + γ√(T/2)), written through erfcx.
double sticky_g(double gamma, double T, double x) {
  const double z = x / std::sqrt(2.0 * T) + gamma * std::sqrt(0.5 * T);
  return erfcx(z) * std::exp(-x * x / (2.0 * T));
}

}  // namespace

double sticky_atom(double gamma, double T) {
  if (!std::isfinite(gamma)) return 0.0;
  return sticky_g(gamma, T, 0.0);
}

double sticky_cdf(double gamma, double T, double x) {
  if (x < 0.0) return 0.0;
  const double reflected = std::erf(x / std::sqrt(2.0 * T));
  if (!std::isfinite(gamma)) return reflected;
  return sticky_g(gamma, T, x) + reflected;
}

double sticky_density(double gamma, double T, double x) {
  if (x <= 0.0) return 0.0;
  if (!std::isfinite(gamma)) return 2.0 * std::exp(-x * x / (2.0 * T)) / std::sqrt(2.0 * std::numbers::pi * T);
  return gamma * sticky_g(gamma, T, x);
}

double sample_sticky_from_zero(double gamma, double T, RngStream& rng) {
  const double u = rng.uniform();
  if (u <= sticky_atom(gamma, T)) return 0.0;
  // Safeguarded Newton on the increasing CDF.
  double lo = 0.0, hi = std::sqrt(T);
  while (sticky_cdf(gamma, T, hi) < u) hi *= 2.0;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double f = sticky_cdf(gamma, T, x) - u;
    if (f > 0.0) hi = x; else lo = x;
    const double p = sticky_density(gamma, T, x);
    double next = p > 0.0 ? x - f / p : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-14 * (1.0 + x)) return next;
    x = next;
  }
  return x;
}

std::vector<double> sample_sticky_1d(const ExactSticky1D& cfg, RngStream& rng) {
  cfg.validate();
  if (cfg.beta0 == 0.0 && cfg.start == 0.0) return sample_reflected_with_local_time(rng, cfg.grid).path;
  const double gamma = cfg.beta0 == 0.0 ? std::numeric_limits<double>::infinity() : cfg.gamma();
  std::vector<double> out;
  out.reserve(cfg.grid.size());
  double x = cfg.start, t = 0.0;
  for (const double tk : cfg.grid) {
    const double h = tk - t;
    if (h > 0.0) {
      if (x > 0.0) {
        // First passage of Brownian motion from x to 0 has the Lévy law x²/Z².
        const double z = rng.normal();
        const double hit = x * x / (z * z);
        if (hit >= h) {
          // Brownian endpoint conditioned on no passage, by rejection.
          for (;;) {
            const double y = x + std::sqrt(h) * rng.normal();
            if (y > 0.0 && rng.uniform() >= std::exp(-2.0 * x * y / h)) {
              x = y;
              break;
            }
          }
        } else {
          x = sample_sticky_from_zero(gamma, h - hit, rng);
        }
      } else {
        x = sample_sticky_from_zero(gamma, h, rng);
      }
      t = tk;
    }
    out.push_back(x);
  }
  return out;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf, double atom,
                    double atom_tol) {
  if (samples.empty()) throw ValidationError("KS statistic of an empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  std::size_t i = 0;
  while (i < samples.size() && samples[i] <= atom_tol) ++i;
  double d = std::abs(static_cast<double>(i) / n - atom);
  for (; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ValidationError("KS statistic of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

GeneratorCheck brute_force_generator_check(const TestFunction& f, const Scenario& scn, const Vec& x, double h,
                                           int n_mc) {
  Scenario s = scn;
  s.start = x;
  s.start_from_mu = false;
  s.horizon = h;
  s.output_times = {h};
  s.n_paths = n_mc;
  if (s.dt > h) s.dt = h;
  const double fx = f.value(x);
  const auto inc = map_paths(s, [&](const Trajectory& tr) { return f.value(tr.state(tr.size() - 1)) - fx; });
  double mean = 0.0;
  for (double v : inc) mean += v;
  mean /= static_cast<double>(inc.size());
  double var = 0.0;
  for (double v : inc) var += (v - mean) * (v - mean);
  var /= std::max<double>(1.0, static_cast<double>(inc.size()) - 1.0);
  GeneratorCheck out;
  out.estimate = mean / h;
  out.std_error = std::sqrt(var / static_cast<double>(inc.size())) / h;
  out.generator = apply_L(f, s.pair, *s.geom, x, s.delta);
  out.residual = out.estimate - out.generator;
  return out;
}

}  // namespace sticky
