#include "sticky/measures.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace sticky {

// -------------------------------------------------------------------------
// DensityPair

DensityPair::DensityPair(FieldPtr alpha, FieldPtr beta) : alpha_(std::move(alpha)), beta_(std::move(beta)) {
  if (!alpha_ || !beta_) throw ValidationError("density fields must be set");
  if (alpha_->dim() != beta_->dim()) throw ValidationError("α and β have different dimensions");
  alpha_const_ = alpha_->constant_value();
  beta_const_ = beta_->constant_value();
  if (alpha_const_) alpha_bound_ = *alpha_const_;
  if (beta_const_) beta_bound_ = *beta_const_;
}

DensityPair DensityPair::uniform(int dim, double alpha, double beta) {
  return DensityPair(constant_field(alpha, dim), constant_field(beta, dim));
}

DensityPair DensityPair::from_expressions(std::string_view alpha, std::string_view beta, int dim) {
  return DensityPair(expression_field(alpha, dim), expression_field(beta, dim));
}

DensityPair DensityPair::gibbs(std::string_view potential, std::string_view beta, int dim) {
  const std::string src = "exp(-(" + std::string(potential) + "))";
  return DensityPair(expression_field(src, dim), expression_field(beta, dim));
}

Vec DensityPair::grad_log_alpha(const Vec& x) const {
  if (alpha_const_) return Vec::Zero(x.size());
  return alpha_->gradient(x) / alpha_->value(x);
}

Vec DensityPair::grad_log_beta(const Vec& x) const {
  if (beta_const_) return Vec::Zero(x.size());
  return beta_->gradient(x) / beta_->value(x);
}

DensityPair DensityPair::with_bounds(std::optional<double> alpha_max, std::optional<double> beta_max) const {
  DensityPair p = *this;
  if (alpha_max) p.alpha_bound_ = alpha_max;
  if (beta_max) p.beta_bound_ = beta_max;
  return p;
}

DensityPair DensityPair::scaled_beta(double c) const {
  if (!(c > 0.0)) throw ValidationError("β scale must be positive");
  FieldPtr scaled;
  if (beta_const_) {
    scaled = constant_field(c * *beta_const_, dim());
  } else {
    FieldPtr base = beta_;
    scaled = function_field({[base, c](const Vec& x) { return c * base->value(x); },
                             [base, c](const Vec& x) { return Vec(c * base->gradient(x)); },
                             [base, c](const Vec& x) { return Mat(c * base->hessian(x)); }},
                            dim(), fmt::format("{:g}*({})", c, base->describe()));
  }
  DensityPair p(alpha_, scaled);
  p.alpha_bound_ = alpha_bound_;
  if (beta_bound_) p.beta_bound_ = c * *beta_bound_;
  return p;
}

std::string DensityPair::describe() const {
  return fmt::format("alpha = {}, beta = {}", alpha_->describe(), beta_->describe());
}

// -------------------------------------------------------------------------
// ReferenceMeasure

namespace {

MassEstimate masses_of(const QuadratureRule& rule, const DensityPair& pair) {
  MassEstimate m;
  for (const auto& q : rule.volume) m.volume += q.w * pair.alpha(q.x);
  for (const auto& q : rule.surface) m.surface += q.w * pair.beta(q.x);
  return m;
}

}  // namespace

ReferenceMeasure::ReferenceMeasure(DensityPair pair, GeometryPtr geom, QuadratureSpec spec)
    : pair_(std::move(pair)), geom_(std::move(geom)), spec_(spec) {
  if (pair_.dim() != geom_->dim()) throw ValidationError("density and geometry dimensions differ");
  rule_ = build_quadrature(*geom_, spec_);
  masses_ = masses_of(rule_, pair_);
  const MassEstimate coarse = masses_of(build_quadrature(*geom_, spec_.coarsened()), pair_);
  masses_.volume_error = std::abs(masses_.volume - coarse.volume);
  masses_.surface_error = std::abs(masses_.surface - coarse.surface);
}

double ReferenceMeasure::integrate_volume(const std::function<double(const Vec&)>& f) const {
  double s = 0.0;
  for (const auto& q : rule_.volume) s += q.w * f(q.x) * pair_.alpha(q.x);
  return s;
}

double ReferenceMeasure::integrate_surface(const std::function<double(const Vec&)>& f) const {
  double s = 0.0;
  for (const auto& q : rule_.surface) s += q.w * f(q.x) * pair_.beta(q.x);
  return s;
}

double ReferenceMeasure::mean(const std::function<double(const Vec&)>& f) const {
  return (integrate_volume(f) + integrate_surface(f)) / masses_.total();
}

MassEstimate mu_masses(const ReferenceMeasure& measure) {
  const MassEstimate& m = measure.raw_masses();
  if (!std::isfinite(m.volume) || !std::isfinite(m.surface))
    throw QuadratureNotConverged("μ masses are not finite");
  const double err = m.volume_error + m.surface_error;
  if (err > measure.spec().rel_tol * std::abs(m.total()))
    throw QuadratureNotConverged(fmt::format("μ masses: coarse/fine gap {:.3g} exceeds {:.3g} of total {:.6g}",
                                             err, measure.spec().rel_tol, m.total()));
  return m;
}

double predicted_occupation_fraction(const ReferenceMeasure& measure, const ComponentSpec& g) {
  mu_masses(measure);
  if (g.map == nullptr) {
    const auto& m = measure.raw_masses();
    return m.surface / m.total();
  }
  const auto& pair = measure.pair();
  double vol = 0.0, surf = 0.0;
  for (const auto& q : measure.rule().volume)
    if (g.contains(q.x)) vol += q.w * pair.alpha(q.x);
  for (const auto& q : measure.rule().surface)
    if (g.contains(q.x)) surf += q.w * pair.beta(q.x);
  if (!(vol + surf > 0.0)) throw ValidationError("component has zero μ-mass");
  return surf / (vol + surf);
}

// -------------------------------------------------------------------------
// Condition screening

bool ValidationReport::passed() const { return first_failure() == nullptr; }

const ConditionCheck* ValidationReport::first_failure() const {
  for (const auto& c : checks)
    if (c.status == CheckStatus::kFail) return &c;
  return nullptr;
}

std::string ValidationReport::summary() const {
  std::string s = fmt::format("conditions at level '{}':\n", to_string(level));
  for (const auto& c : checks) s += fmt::format("  [{}] {}: {}\n", to_string(c.status), c.name, c.evidence);
  return s;
}

ConditionLevel parse_condition_level(std::string_view s) {
  if (s == "construction") return ConditionLevel::kConstruction;
  if (s == "analysis") return ConditionLevel::kAnalysis;
  if (s == "feller") return ConditionLevel::kFeller;
  throw ValidationError("unknown condition level '" + std::string(s) + "'");
}

std::string to_string(ConditionLevel level) {
  switch (level) {
    case ConditionLevel::kConstruction: return "construction";
    case ConditionLevel::kAnalysis: return "analysis";
    case ConditionLevel::kFeller: return "feller";
  }
  return "?";
}

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::kPass: return "pass";
    case CheckStatus::kFail: return "fail";
    case CheckStatus::kNotCheckable: return "not checkable";
  }
  return "?";
}

namespace {

struct PositivityScan {
  double min_value = std::numeric_limits<double>::infinity();
  double zero_fraction = 0.0;  ///< weighted fraction of nodes with value ≤ floor
  bool negative = false;
  bool finite = true;
};

PositivityScan scan_positive(const std::vector<QuadNode>& nodes, const ScalarField& f) {
  PositivityScan s;
  double total = 0.0, zero = 0.0;
  for (const auto& q : nodes) {
    const double v = f.value(q.x);
    total += q.w;
    if (!std::isfinite(v)) s.finite = false;
    s.min_value = std::min(s.min_value, v);
    if (v < 0.0) s.negative = true;
    if (v <= kDensityFloor) zero += q.w;
  }
  s.zero_fraction = total > 0.0 ? zero / total : 0.0;
  return s;
}

CheckStatus positivity_status(const PositivityScan& s) {
  return (s.negative || !s.finite || s.zero_fraction > 1e-3) ? CheckStatus::kFail : CheckStatus::kPass;
}

Vec random_point_in_closure(const DomainGeometry& geom, RngStream& rng) {
  const Vec lo = geom.bbox_lo(), hi = geom.bbox_hi();
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vec x(geom.dim());
    for (int i = 0; i < geom.dim(); ++i) x[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform();
    if (geom.level(x) < 0.0) return x;
  }
  throw ValidationError("could not sample a point of Ω");
}

Vec random_unit(int d, RngStream& rng) {
  Vec u(d);
  do {
    for (int i = 0; i < d; ++i) u[i] = rng.normal();
  } while (u.norm() < 1e-12);
  return u / u.norm();
}

// Bisection jump detector: a continuous field's oscillation on a segment
// shrinks as the segment halves, a jump keeps it.
bool find_jump(const ScalarField& f, const DomainGeometry& geom, int segments, RngStream& rng, Vec& where,
               double& size) {
  const double len0 = 0.05 * geom.diameter();
  for (int s = 0; s < segments; ++s) {
    Vec a = random_point_in_closure(geom, rng);
    Vec b = a + len0 * random_unit(geom.dim(), rng);
    if (!geom.in_closure(b)) continue;
    double fa = f.value(a), fb = f.value(b);
    const double d0 = std::abs(fa - fb);
    if (d0 < 1e-8) continue;
    for (int it = 0; it < 40; ++it) {
      const Vec m = 0.5 * (a + b);
      const double fm = f.value(m);
      if (std::abs(fa - fm) >= std::abs(fm - fb)) {
        b = m;
        fb = fm;
      } else {
        a = m;
        fa = fm;
      }
    }
    const double d = std::abs(fa - fb);
    if (d > std::max(1e-6, 0.25 * d0)) {
      where = 0.5 * (a + b);
      size = d;
      return true;
    }
  }
  return false;
}

struct ShellIntegrals {
  std::vector<double> radii;
  std::vector<double> values;
};

QuadratureSpec screening_spec(int dim) {
  if (dim == 1) return {8, 4, 4096, 1e-6};
  if (dim == 2) return {1024, 8, 256, 1e-6};
  return {192, 96, 96, 1e-6};
}

std::vector<double> dyadic_radii(const DomainGeometry& geom) {
  std::vector<double> r;
  const double r0 = 0.1 * geom.diameter();
  for (int k = 0; k <= 4; ++k) r.push_back(r0 * std::pow(0.5, k));
  return r;
}

std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += fmt::format("{}{:.3g}", i ? ", " : "", v[i]);
  return s;
}

// ∫ over dyadic distance shells around one zero primitive of 1/α dλ.
std::vector<double> inverse_density_shells(const QuadratureRule& rule, const ScalarField& alpha,
                                           const ZeroPrimitive& z, const std::vector<double>& radii) {
  std::vector<double> shells(radii.size() - 1, 0.0);
  for (const auto& q : rule.volume) {
    const double dist = z.distance(q.x);
    if (dist >= radii.front()) continue;
    const double a = alpha.value(q.x);
    if (a <= 0.0) continue;
    for (std::size_t k = 0; k + 1 < radii.size(); ++k)
      if (dist < radii[k] && dist >= radii[k + 1]) shells[k] += q.w / a;
  }
  return shells;
}

double weighted_integral(const std::vector<QuadNode>& nodes, const std::function<double(const Vec&)>& f) {
  double s = 0.0;
  for (const auto& q : nodes) s += q.w * f(q.x);
  return s;
}

ConditionCheck convergence_check(std::string name, double fine, double coarse, std::string what) {
  ConditionCheck c{std::move(name), CheckStatus::kPass, {}};
  const double gap = std::abs(fine - coarse);
  const bool ok = std::isfinite(fine) && std::isfinite(coarse) && gap <= 0.05 * std::abs(fine) + 1e-12;
  c.status = ok ? CheckStatus::kPass : CheckStatus::kFail;
  c.evidence = fmt::format("{} ≈ {:.6g} (coarse {:.6g}){}", what, fine, coarse,
                           ok ? "" : ": refinement does not settle, integral likely divergent");
  return c;
}

}  // namespace

ValidationReport validate_conditions(const DensityPair& pair, const DomainGeometry& geom, ConditionLevel level,
                                     const ValidationOptions& options) {
  ValidationReport report;
  report.level = level;
  const int d = geom.dim();
  const QuadratureRule fine = build_quadrature(geom, options.quadrature);
  const QuadratureRule coarse = build_quadrature(geom, options.quadrature.coarsened());

  // Positivity and integrability.
  const auto sa = scan_positive(fine.volume, pair.alpha_field());
  report.checks.push_back({"positivity: α > 0 λ-a.e.", positivity_status(sa),
                           fmt::format("min α = {:.3g} over {} nodes, λ-fraction with α ≤ {:g}: {:.3g}",
                                       sa.min_value, fine.volume.size(), kDensityFloor, sa.zero_fraction)});
  const auto sb = scan_positive(fine.surface, pair.beta_field());
  report.checks.push_back({"positivity: β > 0 σ-a.e.", positivity_status(sb),
                           fmt::format("min β = {:.3g} over {} boundary nodes, σ-fraction with β ≤ {:g}: {:.3g}",
                                       sb.min_value, fine.surface.size(), kDensityFloor, sb.zero_fraction)});
  {
    const double va = weighted_integral(fine.volume, [&](const Vec& x) { return pair.alpha(x); });
    const double vb = weighted_integral(fine.surface, [&](const Vec& x) { return pair.beta(x); });
    const bool ok = std::isfinite(va) && std::isfinite(vb) && va > 0.0 && vb > 0.0;
    report.checks.push_back({"integrability: α ∈ L¹(Ω), β ∈ L¹(Γ)", ok ? CheckStatus::kPass : CheckStatus::kFail,
                             fmt::format("∫α dλ = {:.6g}, ∫β dσ = {:.6g}", va, vb)});
  }

  // Hamza condition: with α > 0 a.e. the exceptional set lies in the null set
  // {α = 0}; report local integrability of 1/α at declared zeros as evidence.
  {
    ConditionCheck c{"Hamza condition", CheckStatus::kPass, {}};
    if (sa.negative || sa.zero_fraction > 1e-3) {
      c.status = CheckStatus::kFail;
      c.evidence = "α vanishes on a set of positive measure";
    } else if (options.zeros.empty()) {
      c.evidence = "no declared zeros of ϱ; 1/α locally bounded";
    } else {
      const QuadratureRule screen = build_quadrature(geom, screening_spec(d));
      const auto radii = dyadic_radii(geom);
      for (const auto& z : options.zeros.primitives) {
        const auto shells = inverse_density_shells(screen, pair.alpha_field(), z, radii);
        const double ratio = shells.size() >= 2 && shells[shells.size() - 2] > 0.0
                                 ? shells.back() / shells[shells.size() - 2]
                                 : 0.0;
        const bool integrable = ratio < 0.75;
        c.evidence += fmt::format("{}at {}: ∫1/α over dyadic shells [{}], last ratio {:.3g} → 1/α {} in d={}",
                                  c.evidence.empty() ? "" : "; ", z.describe(), format_list(shells), ratio,
                                  integrable ? "locally integrable" : "not locally integrable", d);
      }
      c.evidence += "; the non-integrable set is contained in the λ-null zero set";
    }
    report.checks.push_back(std::move(c));
  }
  if (level == ConditionLevel::kConstruction) return report;

  // Continuity and finite energy of √α (and √β on Γ if δ = 1).
  RngStream rng(options.seed, 0, substream::kSampling);
  for (const auto* field : {&pair.alpha_field(), &pair.beta_field()}) {
    const bool is_alpha = field == &pair.alpha_field();
    ConditionCheck c{is_alpha ? "continuity: α ∈ C(Ω̄)" : "continuity: β ∈ C(Ω̄)", CheckStatus::kPass, {}};
    Vec where;
    double size = 0.0;
    if (find_jump(*field, geom, options.continuity_segments, rng, where, size)) {
      c.status = CheckStatus::kFail;
      std::string at;
      for (int i = 0; i < d; ++i) at += fmt::format("{}{:.6g}", i ? ", " : "", where[i]);
      c.evidence = fmt::format("jump of size {:.3g} near ({})", size, at);
    } else {
      c.evidence = fmt::format("no jump found on {} bisected segments", options.continuity_segments);
    }
    report.checks.push_back(std::move(c));
  }
  {
    auto energy = [&](const QuadratureRule& r) {
      return weighted_integral(r.volume, [&](const Vec& x) {
        const double a = pair.alpha(x);
        if (a <= 0.0) return 0.0;
        return pair.alpha_field().gradient(x).squaredNorm() / (4.0 * a);
      });
    };
    report.checks.push_back(convergence_check("energy: √α ∈ H^{1,2}(Ω)", energy(fine), energy(coarse),
                                              "∫|∇√α|² dλ"));
  }
  if (options.delta == 1 && d >= 2) {
    auto energy = [&](const QuadratureRule& r) {
      return weighted_integral(r.surface, [&](const Vec& x) {
        const double b = pair.beta(x);
        if (b <= 0.0) return 0.0;
        return surface_gradient(geom, pair.beta_field(), x).squaredNorm() / (4.0 * b);
      });
    };
    report.checks.push_back(convergence_check("energy: √β ∈ H^{1,2}(Γ)", energy(fine), energy(coarse),
                                              "∫|∇_Γ√β|² dσ"));
  }
  if (level == ConditionLevel::kAnalysis) return report;

  // |∇α|/α ∈ L^p_loc on compacts avoiding {ϱ = 0}.
  const double p = options.lp_exponent > 0.0 ? options.lp_exponent : std::max(2.0, std::floor(d / 2.0) + 1.0);
  const double keep_out = 0.05 * geom.diameter();
  auto far = [&](const Vec& x) { return options.zeros.empty() || options.zeros.distance(x) >= keep_out; };
  {
    const bool p_ok = p >= 2.0 && p > d / 2.0;
    report.checks.push_back({"L^p screen: exponent", p_ok ? CheckStatus::kPass : CheckStatus::kFail,
                             fmt::format("p = {:g}, d = {} (need p ≥ 2 and p > d/2)", p, d)});
  }
  {
    auto lp = [&](const QuadratureRule& r) {
      return weighted_integral(r.volume, [&](const Vec& x) {
        const double a = pair.alpha(x);
        if (a <= kDensityFloor || !far(x)) return 0.0;
        return std::pow(pair.alpha_field().gradient(x).norm() / a, p) * a;
      });
    };
    report.checks.push_back(convergence_check("L^p screen: |∇α|/α ∈ L^p_loc(αλ)", lp(fine), lp(coarse),
                                              fmt::format("∫(|∇α|/α)^{:g} α dλ off a {:.3g}-tube of zeros", p,
                                                          keep_out)));
  }
  if (options.delta == 1 && d >= 2) {
    auto lp = [&](const QuadratureRule& r) {
      return weighted_integral(r.surface, [&](const Vec& x) {
        const double b = pair.beta(x);
        if (b <= kDensityFloor || !far(x)) return 0.0;
        return std::pow(surface_gradient(geom, pair.beta_field(), x).norm() / b, p) * b;
      });
    };
    report.checks.push_back(convergence_check("L^p screen: |∇_Γβ|/β ∈ L^p_loc(βσ)", lp(fine), lp(coarse),
                                              fmt::format("∫(|∇_Γβ|/β)^{:g} β dσ", p)));
  }
  return report;
}

// -------------------------------------------------------------------------
// Capacity screen

CapacityScreen capacity_screen(const ReferenceMeasure& measure, const ZeroSet& zeros) {
  CapacityScreen out;
  if (zeros.empty()) {
    out.evidence = "no declared zero set";
    return out;
  }
  const auto& geom = measure.geometry();
  const auto& pair = measure.pair();
  const QuadratureRule screen = build_quadrature(geom, screening_spec(geom.dim()));
  out.radii = dyadic_radii(geom);
  out.masses.assign(out.radii.size(), 0.0);
  auto accumulate = [&](const std::vector<QuadNode>& nodes, bool surface) {
    for (const auto& q : nodes) {
      const double dist = zeros.distance(q.x);
      if (dist >= out.radii.front()) continue;
      const double v = q.w * (surface ? pair.beta(q.x) : pair.alpha(q.x));
      for (std::size_t k = 0; k < out.radii.size(); ++k)
        if (dist < out.radii[k]) out.masses[k] += v;
    }
  };
  accumulate(screen.volume, false);
  accumulate(screen.surface, true);

  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < out.radii.size(); ++k)
    if (out.masses[k] > 0.0) lx.push_back(std::log(out.radii[k])), ly.push_back(std::log(out.masses[k]));
  if (lx.size() < 2) {
    out.exponent = std::numeric_limits<double>::infinity();
    out.evidence = "μ(B_r(Z)) below quadrature resolution for all radii";
    return out;
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
  out.exponent = sxy / sxx;
  out.pass = out.exponent >= 1.8;
  out.evidence = fmt::format("μ(B_r(Z)) at r = [{}]: [{}]; fitted exponent {:.3f} ({} r² growth bound)",
                             format_list(out.radii), format_list(out.masses), out.exponent,
                             out.pass ? "consistent with" : "violates");
  return out;
}

// -------------------------------------------------------------------------
// Sampling from μ

InvariantSample sample_invariant_one(const ReferenceMeasure& measure, RngStream& rng) {
  const auto& geom = measure.geometry();
  const auto& pair = measure.pair();
  const auto amax = pair.alpha_bound();
  const auto bmax = pair.beta_bound();
  if (!amax || !bmax) throw EnvelopeUnknown("sample_invariant needs upper bounds for α and β");
  const auto& m = measure.raw_masses();
  const int d = geom.dim();
  const bool surface = rng.uniform() * m.total() < m.surface;

  if (surface) {
    if (d == 1) {
      const auto [a, b] = geom.interval();
      Vec xa(1), xb(1);
      xa[0] = a;
      xb[0] = b;
      const double ba = pair.beta(xa), bb = pair.beta(xb);
      return {rng.uniform() * (ba + bb) < ba ? xa : xb, true};
    }
    const double envelope = 1.1 * measure.rule().surface_jacobian_max * *bmax;
    for (;;) {
      const Vec dir = random_unit(d, rng);
      const double R = geom.ray_radius(dir);
      const Vec x = geom.center() + R * dir;
      const double jac = std::pow(R, d - 1) / dir.dot(geom.normal_field(x));
      if (rng.uniform() * envelope < jac * pair.beta(x)) return {x, true};
    }
  }
  const Vec lo = geom.bbox_lo(), hi = geom.bbox_hi();
  for (;;) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform();
    if (geom.level(x) >= 0.0) continue;
    if (rng.uniform() * *amax < pair.alpha(x)) return {x, false};
  }
}

std::vector<InvariantSample> sample_invariant(const ReferenceMeasure& measure, RngStream& rng, std::size_t count) {
  std::vector<InvariantSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_invariant_one(measure, rng));
  return out;
}

}  // namespace sticky
