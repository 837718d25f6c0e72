#include "sticky/schemes.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace sticky {

SchemeKind parse_scheme(std::string_view s) {
  if (s == "time_change") return SchemeKind::kTimeChange;
  if (s == "direct_sticky") return SchemeKind::kDirectSticky;
  if (s == "surface_only") return SchemeKind::kSurfaceOnly;
  throw ValidationError("unknown scheme '" + std::string(s) + "'");
}

std::string to_string(SchemeKind s) {
  switch (s) {
    case SchemeKind::kTimeChange: return "time_change";
    case SchemeKind::kDirectSticky: return "direct_sticky";
    case SchemeKind::kSurfaceOnly: return "surface_only";
  }
  return "?";
}

// -------------------------------------------------------------------------
// Scenario

double Scenario::effective_h_stick() const { return h_stick > 0.0 ? h_stick : std::sqrt(2.0 * dt); }

void Scenario::validate() const {
  if (!geom) throw ValidationError("scenario has no geometry");
  const int d = geom->dim();
  if (pair.dim() != d) throw ValidationError("density dimension differs from the domain dimension");
  if (delta != 0 && delta != 1) throw ValidationError("δ must be 0 or 1");
  if (delta == 1 && d < 2) throw ValidationError("δ = 1 requires d ≥ 2: tangential boundary diffusion needs dim Γ ≥ 1");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(horizon >= dt)) throw ValidationError("horizon must be at least dt");
  if (n_paths < 1) throw ValidationError("n_paths must be at least 1");
  if (dt_out < 0.0) throw ValidationError("dt_out must be non-negative");
  if (h_stick < 0.0) throw ValidationError("h_stick must be non-negative");
  if (!(internal_budget >= 1.0)) throw ValidationError("internal_budget must be at least 1");
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    if (output_times[i] < 0.0 || output_times[i] > horizon)
      throw ValidationError("output times must lie in [0, horizon]");
    if (i > 0 && !(output_times[i] > output_times[i - 1]))
      throw ValidationError("output times must be strictly increasing");
  }
  if (scheme == SchemeKind::kSurfaceOnly && delta != 1)
    throw ValidationError("surface_only runs Brownian motion on Γ and requires δ = 1");
  if (start_from_mu) return;
  if (start.size() != d) throw ValidationError(fmt::format("start must have {} coordinates", d));
  if (!geom->in_closure(start)) throw ValidationError("start lies outside the closed domain");
  const bool on_gamma = geom->on_boundary(start);
  if (scheme == SchemeKind::kSurfaceOnly && !on_gamma) throw ValidationError("surface_only requires a start on Γ");
  const double rho = on_gamma ? pair.beta(start) : pair.alpha(start);
  if (!(rho > kDensityFloor))
    throw ValidationError("start must satisfy ϱ(start) > 0 (the state space excludes {ϱ = 0})");
  if (!zeros.empty() && zeros.distance(start) <= 0.0) throw ValidationError("start lies on the declared zero set");
}

std::vector<double> Scenario::output_grid() const {
  if (!output_times.empty()) return output_times;
  const double h = effective_dt_out();
  const auto n = static_cast<long long>(std::floor(horizon / h + 1e-9));
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(n + 1));
  for (long long j = 0; j <= n; ++j) g.push_back(static_cast<double>(j) * h);
  return g;
}

// -------------------------------------------------------------------------
// Kernels

namespace {

Vec half_drift(const Vec& x, const DensityPair& pair) {
  if (pair.alpha_constant()) return Vec::Zero(x.size());
  if (!(pair.alpha(x) > kDensityFloor)) throw ZeroAlpha("α vanishes at the current state");
  return 0.5 * pair.grad_log_alpha(x);
}

}  // namespace

Vec step_interior(const Vec& x, const DensityPair& pair, double dt, const Vec& noise) {
  return x + std::sqrt(dt) * noise + dt * half_drift(x, pair);
}

namespace {

enum class BoundaryRule { kMirror, kClip };

struct Proposal {
  Vec next;        ///< where the path continues
  Vec contact_at;  ///< boundary point touched (valid if contact)
  double push = 0.0;
  bool contact = false;
};

// y is an unconstrained proposal; map it back to Ω̄.
Proposal constrain(const Vec& y, const DomainGeometry& geom, BoundaryRule rule) {
  Proposal p;
  if (geom.dim() == 1) {
    const auto [a, b] = geom.interval();
    double v = y[0];
    double last = a;
    while (v < a || v > b) {
      p.contact = true;
      if (v < a) {
        last = a;
        v = rule == BoundaryRule::kMirror ? 2.0 * a - v : a;
      } else {
        last = b;
        v = rule == BoundaryRule::kMirror ? 2.0 * b - v : b;
      }
    }
    p.next = Vec::Constant(1, v);
    p.push = std::abs(v - y[0]);
    p.contact_at = Vec::Constant(1, last);
    return p;
  }
  if (geom.level(y) <= 0.0) {
    p.next = y;
    return p;
  }
  p.contact = true;
  p.contact_at = project_to_boundary(geom, y);
  p.next = p.contact_at;
  p.push = (y - p.contact_at).norm();
  if (rule == BoundaryRule::kMirror) p.push *= 2.0;
  return p;
}

}  // namespace

ReflectedStep reflected_step(const Vec& x, const DensityPair& pair, const DomainGeometry& geom, double dt,
                             const Vec& noise) {
  const Proposal p = constrain(step_interior(x, pair, dt, noise), geom, BoundaryRule::kMirror);
  return {p.next, p.push, p.contact};
}

Vec surface_step(const Vec& x, const DensityPair& pair, const DomainGeometry& geom, double dt, const Vec& noise,
                 bool beta_drift) {
  const BoundaryFrame fr = boundary_frame(geom, x);
  Vec drift = -0.5 * fr.curvature * fr.normal;
  if (beta_drift && !pair.beta_constant()) {
    if (!(pair.beta(x) > kDensityFloor)) throw ZeroBeta("β vanishes at the current boundary state");
    drift += 0.5 * (fr.projection * pair.grad_log_beta(x));
  }
  const Vec y = x + std::sqrt(dt) * (fr.projection * noise) + dt * drift;
  return project_to_boundary(geom, y);
}

// -------------------------------------------------------------------------
// Path runners

namespace {

class PathRunner {
 public:
  PathRunner(const Scenario& scn, std::uint32_t path_id, const std::optional<Vec>& start)
      : scn_(scn),
        geom_(*scn.geom),
        pair_(scn.pair),
        d_(scn.geom->dim()),
        dyn_(scn.seed, path_id, substream::kDynamics),
        clk_(scn.seed, path_id, substream::kClock),
        grid_(scn.output_grid()),
        x_(start ? *start : scn.start) {
    tr_.dim = d_;
    tr_.path_id = path_id;
    tr_.times.reserve(grid_.size());
    tr_.coords.reserve(grid_.size() * static_cast<std::size_t>(d_));
    tr_.on_boundary.reserve(grid_.size());
    tr_.local_time.reserve(grid_.size());
    tr_.boundary_time.reserve(grid_.size());
    if (!scn.zeros.empty()) {
      components_ = std::make_unique<ComponentMap>(geom_, scn.zeros);
      component_ = components_->component_of(x_);
    }
    note_level(x_);
  }

  Trajectory run() {
    try {
      switch (scn_.scheme) {
        case SchemeKind::kTimeChange: run_a(); break;
        case SchemeKind::kDirectSticky: run_b(); break;
        case SchemeKind::kSurfaceOnly: run_surface(); break;
      }
    } catch (const HorizonNotReached&) {
      throw;
    } catch (const Error& e) {
      tr_.aborted = true;
      tr_.diagnostic = fmt::format("path {} aborted at t = {:.6g}: {}", tr_.path_id, t_, e.what());
    }
    tr_.stats.internal_time = tau_;
    return std::move(tr_);
  }

 private:
  bool done() const { return next_ >= grid_.size(); }

  Vec gaussian() {
    Vec z(d_);
    for (int i = 0; i < d_; ++i) z[i] = dyn_.normal();
    return z;
  }

  // Emits grid samples with time in [t_, t_ + h) at state x; L and the
  // boundary clock grow linearly across boundary segments.
  std::size_t emit(double h, const Vec& x, bool boundary, double dL) {
    const double t1 = t_ + h;
    std::size_t count = 0;
    while (next_ < grid_.size() && grid_[next_] < t1) {
      const double s = grid_[next_];
      const double frac = h > 0.0 ? std::clamp((s - t_) / h, 0.0, 1.0) : 0.0;
      tr_.times.push_back(s);
      for (int i = 0; i < d_; ++i) tr_.coords.push_back(x[i]);
      tr_.on_boundary.push_back(boundary ? 1 : 0);
      tr_.local_time.push_back(L_ + frac * dL);
      tr_.boundary_time.push_back(bt_ + (boundary ? std::max(0.0, s - t_) : 0.0));
      ++next_;
      ++count;
    }
    return count;
  }

  void note_level(const Vec& x) { tr_.stats.max_level = std::max(tr_.stats.max_level, geom_.level(x)); }

  bool same_component(const Vec& y) const {
    return !components_ || components_->component_of(y) == component_;
  }

  // Proposal from x_ over h with Brownian increment dW; nullopt when the
  // step must be refined (projection failure or component crossing).
  std::optional<Proposal> propose(double h, const Vec& dW, BoundaryRule rule) {
    const Vec y = x_ + dW + h * half_drift(x_, pair_);
    Proposal p;
    try {
      p = constrain(y, geom_, rule);
    } catch (const ProjectionDiverged&) {
      last_failure_diverged_ = true;
      return std::nullopt;
    }
    if (!same_component(p.next)) {
      last_failure_diverged_ = false;
      return std::nullopt;
    }
    return p;
  }

  // Brownian bridge split of a refused increment into two half steps.
  template <class Step>
  void refine(double h, const Vec& dW, int level, Step&& step) {
    ++tr_.stats.halvings;
    const Vec mid = 0.5 * dW + std::sqrt(0.25 * h) * gaussian();
    step(0.5 * h, mid, level + 1);
    if (!done()) step(0.5 * h, dW - mid, level + 1);
  }

  void refuse(double h) {
    if (last_failure_diverged_)
      throw ProjectionDiverged(fmt::format("projection failed after {} step halvings", scn_.max_halvings));
    ++tr_.stats.rejections;
    emit(h, x_, false, 0.0);
    t_ += h;
    tau_ += h;
  }

  // One surface step of length h with standard normal noise xi. A failed
  // projection or a component crossing splits the increment by a Brownian
  // bridge; at full depth a crossing keeps z.
  Vec surface_move(const Vec& z, double h, const Vec& xi, int level, bool beta_drift) {
    std::optional<Vec> y;
    try {
      y = surface_step(z, pair_, geom_, h, xi, beta_drift);
      last_failure_diverged_ = false;
    } catch (const ProjectionDiverged&) {
      last_failure_diverged_ = true;
    }
    if (y && same_component(*y)) return *y;
    if (level >= scn_.max_halvings) {
      if (last_failure_diverged_)
        throw ProjectionDiverged(fmt::format("surface projection failed after {} step halvings", scn_.max_halvings));
      ++tr_.stats.rejections;
      return z;
    }
    ++tr_.stats.halvings;
    const double sh = std::sqrt(h), sq = std::sqrt(0.5 * h);
    const Vec w = sh * xi;
    const Vec mid = 0.5 * w + std::sqrt(0.25 * h) * gaussian();
    const Vec half = surface_move(z, 0.5 * h, Vec(mid / sq), level + 1, beta_drift);
    return surface_move(half, 0.5 * h, Vec((w - mid) / sq), level + 1, beta_drift);
  }

  // ---- scheme A: reflected diffusion + time change

  // Image at depth e below the contact point z, or z itself when that image
  // leaves Ω or the start component.
  Vec mirror_below(const Vec& z, double e) const {
    if (d_ == 1) {
      const auto [a, b] = geom_.interval();
      return Vec::Constant(1, z[0] <= a ? a + e : b - e);
    }
    const Vec in = z - e * geom_.normal_field(z);
    return geom_.level(in) < 0.0 && same_component(in) ? in : z;
  }

  // A μ-distributed start on Γ is taken mid-way through a stuck interval.
  // Near a flat boundary the internal walk keeps Lebesgue measure, contacts
  // have overshoot density ∝ P(ξ > e)·√dt, and the interval holding a given
  // physical instant is length-biased: e = |N₃|√U₁, elapsed fraction 1 − U₂.
  void stationary_entry() {
    const double a = pair_.alpha(x_), b = pair_.beta(x_);
    if (!(a > kDensityFloor)) throw ZeroAlpha("α vanishes at the start point");
    double n3 = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double g = clk_.normal();
      n3 += g * g;
    }
    const double e = std::sqrt(scn_.dt) * std::sqrt(n3) * std::sqrt(clk_.uniform());
    const double dL = 4.0 * e / a * clk_.uniform();
    x_ = mirror_below(stick(x_, b * dL, dL), e);
    note_level(x_);
  }

  void run_a() {
    const double budget = scn_.internal_budget * scn_.horizon;
    const double sq = std::sqrt(scn_.dt);
    if (scn_.start_from_mu && geom_.on_boundary(x_)) stationary_entry();
    while (!done()) {
      if (tau_ > budget)
        throw HorizonNotReached(fmt::format("internal time {:.6g} exhausted before physical time reached {:.6g}",
                                            tau_, scn_.horizon));
      a_step(scn_.dt, sq * gaussian(), 0);
    }
  }

  void a_step(double h, const Vec& dW, int level) {
    const auto p = propose(h, dW, BoundaryRule::kMirror);
    if (!p) {
      if (level < scn_.max_halvings) {
        refine(h, dW, level, [this](double hh, const Vec& w, int l) { a_step(hh, w, l); });
      } else {
        refuse(h);
      }
      return;
    }
    if (emit(h, x_, false, 0.0) > 0) mark_clock();
    t_ += h;
    tau_ += h;
    ++tr_.stats.steps;
    if (p->contact) {
      const Vec& z = p->contact_at;
      const double a = pair_.alpha(z);
      if (!(a > kDensityFloor)) throw ZeroAlpha("α vanishes at a boundary contact point");
      const double dL = 2.0 * p->push / a;
      const Vec moved = stick(z, pair_.beta(z) * dL, dL);
      x_ = d_ == 1 ? p->next : mirror_below(moved, 0.5 * p->push);
    } else {
      x_ = p->next;
    }
    note_level(x_);
  }

  void mark_clock() {
    auto& cm = tr_.clock_map;
    if (cm.empty() || (tau_ > cm.back().first && t_ > cm.back().second)) cm.emplace_back(tau_, t_);
  }

  // Stuck interval of physical length s at z carrying local time dL; with
  // δ = 1 the point diffuses along Γ meanwhile. Returns the final position.
  Vec stick(Vec z, double s, double dL) {
    ++tr_.stats.boundary_events;
    if (!(s > 0.0)) {
      L_ += dL;
      return z;
    }
    if (scn_.delta == 0 || d_ == 1) {
      emit(s, z, true, dL);
      t_ += s;
      bt_ += s;
      L_ += dL;
      return z;
    }
    const int n = std::max(1, static_cast<int>(std::ceil(s / scn_.dt)));
    const double tau = s / n;
    for (int i = 0; i < n; ++i) {
      emit(tau, z, true, dL / n);
      t_ += tau;
      bt_ += tau;
      L_ += dL / n;
      z = surface_move(z, tau, gaussian(), 0, true);
      if (done()) break;
    }
    return z;
  }

  // ---- scheme B: direct sticky stepping

  void run_b() {
    boundary_mode_ = geom_.on_boundary(x_);
    const double sq = std::sqrt(scn_.dt);
    const double h_stick = scn_.effective_h_stick();
    while (!done()) {
      if (!boundary_mode_) {
        b_interior(scn_.dt, sq * gaussian(), 0);
        continue;
      }
      const double beta = pair_.beta(x_);
      if (!(beta > kDensityFloor)) throw ZeroBeta("β vanishes at the current boundary state");
      const double rate = pair_.alpha(x_) / beta / h_stick;
      const double q = rate * scn_.dt / (1.0 + rate * scn_.dt);
      const double u = clk_.uniform();
      const Vec xi = gaussian();
      if (u < q) {
        b_leave(xi);
      } else {
        b_boundary(xi, beta);
      }
    }
  }

  void b_interior(double h, const Vec& dW, int level) {
    const auto p = propose(h, dW, BoundaryRule::kClip);
    if (!p) {
      if (level < scn_.max_halvings) {
        refine(h, dW, level, [this](double hh, const Vec& w, int l) { b_interior(hh, w, l); });
      } else {
        refuse(h);
      }
      return;
    }
    emit(h, x_, false, 0.0);
    t_ += h;
    tau_ += h;
    ++tr_.stats.steps;
    x_ = p->next;
    if (p->contact) boundary_mode_ = true;
    note_level(x_);
  }

  void b_leave(const Vec& xi) {
    emit(scn_.dt, x_, false, 0.0);
    t_ += scn_.dt;
    tau_ += scn_.dt;
    ++tr_.stats.steps;
    const auto p = propose(scn_.dt, std::sqrt(scn_.dt) * xi, BoundaryRule::kClip);
    if (!p) {
      ++tr_.stats.rejections;
      return;
    }
    x_ = p->next;
    boundary_mode_ = p->contact;
    note_level(x_);
  }

  void b_boundary(const Vec& xi, double beta) {
    const double dL = scn_.dt / beta;
    emit(scn_.dt, x_, true, dL);
    t_ += scn_.dt;
    tau_ += scn_.dt;
    bt_ += scn_.dt;
    L_ += dL;
    ++tr_.stats.steps;
    ++tr_.stats.boundary_events;
    if (scn_.delta == 1 && d_ >= 2) {
      x_ = surface_move(x_, scn_.dt, xi, 0, true);
      note_level(x_);
    }
  }

  // ---- Brownian motion on Γ

  void run_surface() {
    if (!geom_.on_boundary(x_)) throw NotOnBoundary("surface_only start is not on Γ");
    while (!done()) {
      const double beta = pair_.beta(x_);
      const double dL = beta > kDensityFloor ? scn_.dt / beta : 0.0;
      emit(scn_.dt, x_, true, dL);
      t_ += scn_.dt;
      tau_ += scn_.dt;
      bt_ += scn_.dt;
      L_ += dL;
      ++tr_.stats.steps;
      ++tr_.stats.boundary_events;
      x_ = surface_move(x_, scn_.dt, gaussian(), 0, false);
      note_level(x_);
    }
  }

  const Scenario& scn_;
  const DomainGeometry& geom_;
  const DensityPair& pair_;
  int d_;
  RngStream dyn_;
  RngStream clk_;
  std::vector<double> grid_;
  std::size_t next_ = 0;
  Trajectory tr_;
  Vec x_;
  double t_ = 0.0;    // physical time
  double tau_ = 0.0;  // internal time
  double L_ = 0.0;
  double bt_ = 0.0;
  bool boundary_mode_ = false;
  bool last_failure_diverged_ = false;
  std::unique_ptr<ComponentMap> components_;
  int component_ = -1;
};

Trajectory run_checked(const Scenario& scn, SchemeKind kind, std::uint32_t path_id, const std::optional<Vec>& start) {
  if (scn.scheme != kind) {
    Scenario copy = scn;
    copy.scheme = kind;
    return PathRunner(copy, path_id, start).run();
  }
  return PathRunner(scn, path_id, start).run();
}

}  // namespace

Trajectory run_time_change(const Scenario& scn, std::uint32_t path_id, const std::optional<Vec>& start) {
  return run_checked(scn, SchemeKind::kTimeChange, path_id, start);
}

Trajectory run_direct_sticky(const Scenario& scn, std::uint32_t path_id, const std::optional<Vec>& start) {
  return run_checked(scn, SchemeKind::kDirectSticky, path_id, start);
}

Trajectory run_surface_only(const Scenario& scn, std::uint32_t path_id, const std::optional<Vec>& start) {
  return run_checked(scn, SchemeKind::kSurfaceOnly, path_id, start);
}

Trajectory run_path(const Scenario& scn, std::uint32_t path_id, const std::optional<Vec>& start) {
  return PathRunner(scn, path_id, start).run();
}

// -------------------------------------------------------------------------
// Ensembles

EnsembleContext::EnsembleContext(const Scenario& scn) : scn_(&scn) {
  if (scn.start_from_mu) measure_ = std::make_shared<ReferenceMeasure>(scn.pair, scn.geom, scn.quadrature);
}

Vec EnsembleContext::start_of(std::uint32_t path_id) const {
  if (!measure_) return scn_->start;
  RngStream rng(scn_->seed, path_id, substream::kStart);
  for (;;) {
    const InvariantSample s = sample_invariant_one(*measure_, rng);
    if (scn_->scheme == SchemeKind::kSurfaceOnly && !s.on_boundary) continue;
    if (!scn_->zeros.empty() && scn_->zeros.distance(s.x) <= 0.0) continue;
    return s.x;
  }
}

int worker_count() {
  if (const char* env = std::getenv("STICKY_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<Trajectory> run_ensemble(const Scenario& scn, int workers) {
  return map_paths(scn, [](const Trajectory& t) { return t; }, workers);
}

}  // namespace sticky
