#pragma once

#include "sticky/generator.hpp"
#include "sticky/rng.hpp"
#include "sticky/schemes.hpp"

#include <functional>
#include <vector>

namespace sticky {

/// Sticky Brownian motion on [0, ∞) with interior density α₀ and boundary
/// weight β₀ at 0 (δ = 0). The stickiness rate is γ = α₀/β₀.
struct ExactSticky1D {
  double alpha0 = 1.0;
  double beta0 = 1.0;
  double horizon = 1.0;
  std::vector<double> grid;  ///< output times, increasing from 0
  double start = 0.0;

  void validate() const;
  double gamma() const { return alpha0 / beta0; }
};

struct ReflectedPath {
  std::vector<double> path;        ///< reflected BM on the grid, started at 0
  std::vector<double> local_time;  ///< Skorokhod local time at 0 (running max of the driver)
};

/// Exact joint samples of (|W|, L⁰) on the grid via (S − B, S), with the
/// running maximum S updated by the Brownian-bridge maximum of each interval.
ReflectedPath sample_reflected_with_local_time(RngStream& rng, const std::vector<double>& grid);

/// exp(z²) erfc(z).
double erfcx(double z);

/// P(X_T = 0) for the sticky motion started at 0.
double sticky_atom(double gamma, double T);
/// P(X_T ≤ x) for the sticky motion started at 0.
double sticky_cdf(double gamma, double T, double x);
/// Density of the continuous part at x > 0.
double sticky_density(double gamma, double T, double x);
/// Inverse-CDF draw of X_T from 0.
double sample_sticky_from_zero(double gamma, double T, RngStream& rng);

/// Exact grid sample of the sticky motion: Brownian legs until 0 is hit
/// (Lévy first-passage law), the closed-form law from 0 afterwards. With
/// β₀ = 0 it returns the reflected driver of the same stream.
std::vector<double> sample_sticky_1d(const ExactSticky1D& cfg, RngStream& rng);

/// One-sample Kolmogorov–Smirnov distance against a CDF with an atom at 0
/// (samples ≤ atom_tol count as 0).
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf, double atom,
                    double atom_tol = 1e-12);
/// Two-sample KS distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

struct GeneratorCheck {
  double estimate = 0.0;   ///< (E_x f(X_h) − f(x))/h
  double std_error = 0.0;
  double generator = 0.0;  ///< Lf(x)
  double residual = 0.0;   ///< estimate − generator
};

/// Monte Carlo of the scenario's scheme from x over [0, h] with n_mc paths.
GeneratorCheck brute_force_generator_check(const TestFunction& f, const Scenario& scn, const Vec& x, double h,
                                           int n_mc);

}  // namespace sticky
