#include "sticky/observables.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace sticky {

ObservableReport& ObservableReport::against(double value, std::string note, double sigma_level,
                                            double abs_tolerance) {
  target = value;
  target_note = std::move(note);
  sigma = sigma_level;
  tolerance = abs_tolerance;
  verdict = std::abs(estimate - value) <= std::max(sigma * std_error, tolerance);
  return *this;
}

Window default_window(double horizon, double burn_fraction) { return {burn_fraction * horizon, horizon}; }

BatchSeries batch_series(const Trajectory& tr, const Window& w, const std::function<double(std::size_t)>& value,
                         const BatchOptions& opt) {
  // Samples in [t0, t1) weighted by the time to the next sample (or t1).
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < tr.size(); ++i)
    if (tr.times[i] >= w.t0 && tr.times[i] < w.t1) idx.push_back(i);
  const int per = opt.min_batch_size;
  const int nb = std::min<int>(opt.batches, static_cast<int>(idx.size()) / std::max(1, per));
  if (nb < opt.min_batches)
    throw WindowTooShort(fmt::format("window [{:.6g}, {:.6g}) holds {} samples; need {} batches of {}", w.t0,
                                     w.t1, idx.size(), opt.min_batches, per));
  BatchSeries s;
  s.means.reserve(static_cast<std::size_t>(nb));
  const std::size_t n = idx.size();
  for (int b = 0; b < nb; ++b) {
    const std::size_t lo = n * static_cast<std::size_t>(b) / static_cast<std::size_t>(nb);
    const std::size_t hi = n * static_cast<std::size_t>(b + 1) / static_cast<std::size_t>(nb);
    double sum = 0.0, dur = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      const std::size_t i = idx[k];
      const double next = i + 1 < tr.size() ? std::min(tr.times[i + 1], w.t1) : w.t1;
      const double dt = std::isfinite(next) ? next - tr.times[i] : 0.0;
      const double v = value(i);
      sum += v * dt;
      dur += dt;
      s.weighted_sq += v * v * dt;
    }
    s.means.push_back(dur > 0.0 ? sum / dur : 0.0);
    s.weighted_sum += sum;
    s.duration += dur;
  }
  return s;
}

ObservableReport pool_batches(std::string name, const std::vector<BatchSeries>& series) {
  ObservableReport r;
  r.name = std::move(name);
  double sum = 0.0, sq = 0.0, dur = 0.0;
  std::vector<double> means;
  for (const auto& s : series) {
    sum += s.weighted_sum;
    sq += s.weighted_sq;
    dur += s.duration;
    means.insert(means.end(), s.means.begin(), s.means.end());
  }
  if (!(dur > 0.0) || means.size() < 2) throw WindowTooShort("no samples in the window");
  r.estimate = sum / dur;
  double mb = 0.0;
  for (double m : means) mb += m;
  mb /= static_cast<double>(means.size());
  double var = 0.0;
  for (double m : means) var += (m - mb) * (m - mb);
  var /= static_cast<double>(means.size() - 1);
  r.std_error = std::sqrt(var / static_cast<double>(means.size()));
  const double pointwise_var = std::max(0.0, sq / dur - r.estimate * r.estimate);
  r.n_effective = r.std_error > 0.0 ? pointwise_var / (r.std_error * r.std_error)
                                    : static_cast<double>(means.size());
  return r;
}

ObservableReport occupation_fraction(const std::vector<Trajectory>& trs, const Window& w, const BatchOptions& opt) {
  std::vector<BatchSeries> series;
  for (const auto& tr : trs)
    series.push_back(batch_series(tr, w, [&](std::size_t i) { return tr.on_boundary[i] ? 1.0 : 0.0; }, opt));
  return pool_batches("occupation_fraction", series);
}

ObservableReport occupation_fraction(const Trajectory& tr, const Window& w, const BatchOptions& opt) {
  return occupation_fraction(std::vector<Trajectory>{tr}, w, opt);
}

ObservableReport ergodic_average(const std::vector<Trajectory>& trs, const TestFunction& f, const Window& w,
                                 const BatchOptions& opt) {
  std::vector<BatchSeries> series;
  for (const auto& tr : trs)
    series.push_back(batch_series(tr, w, [&](std::size_t i) { return f.value(tr.state(i)); }, opt));
  return pool_batches("ergodic_average[" + f.label + "]", series);
}

ObservableReport ergodic_average(const Trajectory& tr, const TestFunction& f, const Window& w,
                                 const BatchOptions& opt) {
  return ergodic_average(std::vector<Trajectory>{tr}, f, w, opt);
}

StickinessReport stickiness_verdict(const std::vector<Trajectory>& trs, const Window& w, double threshold,
                                    double sigma, const BatchOptions& opt) {
  StickinessReport r;
  r.occupation = occupation_fraction(trs, w, opt);
  r.occupation.name = "stickiness";
  r.occupation.sigma = sigma;
  r.sticky = r.occupation.lower_bound() > threshold;
  r.occupation.verdict = r.sticky;
  r.occupation.target_note = fmt::format("sticky iff occupation lower bound > {:g}", threshold);
  for (const auto& tr : trs) {
    double run_start = -1.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (tr.times[i] < w.t0 || tr.times[i] >= w.t1) continue;
      if (tr.on_boundary[i]) {
        if (run_start < 0.0) run_start = tr.times[i];
        const double end = i + 1 < tr.size() ? tr.times[i + 1] : tr.times[i];
        r.max_sojourn = std::max(r.max_sojourn, end - run_start);
      } else {
        run_start = -1.0;
      }
    }
  }
  return r;
}

ObservableReport mean_report(std::string name, const std::vector<double>& values) {
  ObservableReport r;
  r.name = std::move(name);
  const double n = static_cast<double>(values.size());
  if (values.empty()) throw ValidationError("mean of an empty ensemble");
  double m = 0.0;
  for (double v : values) m += v;
  m /= n;
  double var = 0.0;
  for (double v : values) var += (v - m) * (v - m);
  var /= std::max(1.0, n - 1.0);
  r.estimate = m;
  r.std_error = std::sqrt(var / n);
  r.n_effective = n;
  return r;
}

double martingale_increment(const Trajectory& tr, const TestFunction& f, const Scenario& scn, double t0, double t1) {
  const double eps = 1e-9 * std::max(1.0, scn.horizon);
  std::size_t first = 0;
  while (first < tr.size() && tr.times[first] < t0 - eps) ++first;
  std::size_t last = first;
  while (last + 1 < tr.size() && tr.times[last + 1] <= t1 + eps) ++last;
  if (first >= tr.size() || last == first) return 0.0;
  double integral = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    const Region region = tr.on_boundary[i] ? Region::kBoundary : Region::kInterior;
    integral += apply_L(f, scn.pair, *scn.geom, tr.state(i), scn.delta, region) * (tr.times[i + 1] - tr.times[i]);
  }
  return f.value(tr.state(last)) - f.value(tr.state(first)) - integral;
}

std::vector<ObservableReport> residual_suite(const Scenario& scn, const std::vector<TestFunction>& bank,
                                             const ResidualOptions& opt) {
  std::vector<ObservableReport> out;
  const std::size_t nf = bank.size();
  auto pairs = opt.symmetry_pairs;
  if (pairs.empty() && nf >= 3) pairs = {{1, nf - 1}, {nf - 2, nf - 1}};

  if (opt.martingale) {
    Scenario s = scn;
    s.dt_out = 0.0;
    s.output_times.clear();
    if (opt.martingale_from_mu) s.start_from_mu = true;
    if (!(opt.martingale_offset >= 0.0 && opt.martingale_offset < s.horizon))
      throw ValidationError("martingale offset must lie in [0, horizon)");
    const double t0 = opt.martingale_offset;
    const auto per_path = map_paths(s, [&](const Trajectory& tr) {
      std::vector<double> v;
      for (const auto& f : bank) v.push_back(martingale_increment(tr, f, s, t0));
      return v;
    });
    for (std::size_t k = 0; k < nf; ++k) {
      std::vector<double> col;
      for (const auto& v : per_path) col.push_back(v[k]);
      out.push_back(mean_report("martingale[" + bank[k].label + "]", col)
                        .against(0.0, "martingale problem: mean residual 0", opt.sigma));
    }
  }

  if (opt.invariance || opt.symmetry) {
    Scenario s = scn;
    s.start_from_mu = true;
    s.output_times = {0.0, s.horizon};
    const ReferenceMeasure measure(s.pair, s.geom, s.quadrature);
    const auto per_path = map_paths(s, [&](const Trajectory& tr) {
      const Vec x0 = tr.state(0), xt = tr.state(tr.size() - 1);
      std::vector<double> v;
      for (const auto& f : bank) v.push_back(f.value(xt));
      for (const auto& [i, j] : pairs)
        v.push_back(bank[j].value(x0) * bank[i].value(xt) - bank[i].value(x0) * bank[j].value(xt));
      return v;
    });
    if (opt.invariance) {
      for (std::size_t k = 0; k < nf; ++k) {
        std::vector<double> col;
        for (const auto& v : per_path) col.push_back(v[k]);
        const double target = measure.mean([&](const Vec& x) { return bank[k].value(x); });
        out.push_back(mean_report("invariance[" + bank[k].label + "]", col)
                          .against(target, "μ-average by quadrature", opt.sigma));
      }
    }
    if (opt.symmetry) {
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        std::vector<double> col;
        for (const auto& v : per_path) col.push_back(v[nf + p]);
        const auto& [i, j] = pairs[p];
        out.push_back(mean_report("symmetry[" + bank[i].label + "," + bank[j].label + "]", col)
                          .against(0.0, "∫p_t f·g dμ − ∫f·p_t g dμ = 0", opt.sigma));
      }
    }
  }

  if (opt.wentzell) {
    const TestFunction one = make_test_function("1", scn.geom->dim());
    const QuadratureRule rule = build_quadrature(*scn.geom, {32, 8, 4, 1e-6});
    double worst = 0.0;
    for (const auto& q : rule.surface)
      worst = std::max(worst, std::abs(wentzell_residual(one, scn.pair, *scn.geom, q.x, scn.delta)));
    ObservableReport r;
    r.name = "wentzell[1]";
    r.estimate = worst;
    r.n_effective = static_cast<double>(rule.surface.size());
    out.push_back(r.against(0.0, "constants satisfy the boundary condition exactly", opt.sigma));
  }
  return out;
}

}  // namespace sticky
