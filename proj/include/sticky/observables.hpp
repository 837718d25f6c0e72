#pragma once

#include "sticky/generator.hpp"
#include "sticky/measures.hpp"
#include "sticky/schemes.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sticky {

struct ObservableReport {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double n_effective = 0.0;
  std::optional<double> target;
  std::string target_note;
  double sigma = 4.0;
  double tolerance = 0.0;  ///< absolute slack accepted in addition to sigma·std_error
  bool verdict = true;

  /// Sets the target and recomputes the verdict: |estimate − target| ≤ max(sigma·SE, tolerance).
  ObservableReport& against(double value, std::string note, double sigma_level = 4.0, double abs_tolerance = 0.0);
  double lower_bound() const { return estimate - sigma * std_error; }
  double upper_bound() const { return estimate + sigma * std_error; }
};

struct Window {
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
};

/// [burn·T, T].
Window default_window(double horizon, double burn_fraction = 0.05);

struct BatchOptions {
  int batches = 50;
  int min_batches = 20;
  int min_batch_size = 10;
};

/// Time-weighted batch means of value(i) over the samples of one path inside the window.
struct BatchSeries {
  std::vector<double> means;
  double duration = 0.0;
  double weighted_sum = 0.0;  ///< Σ v Δt
  double weighted_sq = 0.0;   ///< Σ v² Δt
};

BatchSeries batch_series(const Trajectory& tr, const Window& w, const std::function<double(std::size_t)>& value,
                         const BatchOptions& opt = {});

/// Pools batch series of several paths into one estimate with batch-means SE.
ObservableReport pool_batches(std::string name, const std::vector<BatchSeries>& series);

/// Time average of the boundary flag. Throws WindowTooShort.
ObservableReport occupation_fraction(const Trajectory& tr, const Window& w, const BatchOptions& opt = {});
ObservableReport occupation_fraction(const std::vector<Trajectory>& trs, const Window& w,
                                     const BatchOptions& opt = {});

ObservableReport ergodic_average(const Trajectory& tr, const TestFunction& f, const Window& w,
                                 const BatchOptions& opt = {});
ObservableReport ergodic_average(const std::vector<Trajectory>& trs, const TestFunction& f, const Window& w,
                                 const BatchOptions& opt = {});

struct StickinessReport {
  ObservableReport occupation;
  double max_sojourn = 0.0;  ///< longest run of boundary samples, in physical time
  bool sticky = false;
};

/// Sticky iff the occupation lower bound (estimate − sigma·SE) exceeds `threshold`.
StickinessReport stickiness_verdict(const std::vector<Trajectory>& trs, const Window& w, double threshold = 0.0,
                                    double sigma = 4.0, const BatchOptions& opt = {});

/// Ensemble mean and standard error of per-path values.
ObservableReport mean_report(std::string name, const std::vector<double>& values);

/// f(X_t1) − f(X_t0) − Σ Lf(X_s)Δs over the samples in [t0, t1], Lf evaluated
/// by the path's boundary flags. The default covers the whole path.
double martingale_increment(const Trajectory& tr, const TestFunction& f, const Scenario& scn, double t0 = 0.0,
                            double t1 = std::numeric_limits<double>::infinity());

struct ResidualOptions {
  bool martingale = true;
  bool invariance = true;
  bool symmetry = true;
  bool wentzell = true;
  double sigma = 4.0;
  /// Martingale window [offset, horizon]; with a positive offset the path
  /// settles before the window opens.
  double martingale_offset = 0.0;
  bool martingale_from_mu = false;  ///< draw martingale starts from μ
  std::vector<std::pair<std::size_t, std::size_t>> symmetry_pairs;  ///< indices into the bank; empty picks two
};

/// Martingale residuals, μ-invariance, μ-symmetry and constant Wentzell
/// checks. Invariance and symmetry draw starts from μ; one ensemble serves all.
std::vector<ObservableReport> residual_suite(const Scenario& scn, const std::vector<TestFunction>& bank,
                                             const ResidualOptions& opt = {});

}  // namespace sticky
