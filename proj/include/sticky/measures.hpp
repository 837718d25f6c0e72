#pragma once

#include "sticky/field.hpp"
#include "sticky/geometry.hpp"
#include "sticky/quadrature.hpp"
#include "sticky/rng.hpp"
#include "sticky/zeroset.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sticky {

/// Densities below this count as zero for drift evaluation.
inline constexpr double kDensityFloor = 1e-14;

/// α on Ω̄ and β extended to Ω̄; μ = αλ + βσ uses only the trace of β on Γ.
class DensityPair {
 public:
  DensityPair(FieldPtr alpha, FieldPtr beta);

  static DensityPair uniform(int dim, double alpha = 1.0, double beta = 1.0);
  /// Raw expressions in the scenario grammar.
  static DensityPair from_expressions(std::string_view alpha, std::string_view beta, int dim);
  /// α = exp(−V).
  static DensityPair gibbs(std::string_view potential, std::string_view beta, int dim);

  int dim() const { return alpha_->dim(); }
  const ScalarField& alpha_field() const { return *alpha_; }
  const ScalarField& beta_field() const { return *beta_; }
  const FieldPtr& alpha_ptr() const { return alpha_; }
  const FieldPtr& beta_ptr() const { return beta_; }

  double alpha(const Vec& x) const { return alpha_const_ ? *alpha_const_ : alpha_->value(x); }
  double beta(const Vec& x) const { return beta_const_ ? *beta_const_ : beta_->value(x); }
  /// ∇α/α; zero for constant α. No positivity check.
  Vec grad_log_alpha(const Vec& x) const;
  Vec grad_log_beta(const Vec& x) const;
  bool alpha_constant() const { return alpha_const_.has_value(); }
  bool beta_constant() const { return beta_const_.has_value(); }

  /// Upper bounds used as rejection envelopes. Constants carry their own.
  std::optional<double> alpha_bound() const { return alpha_bound_; }
  std::optional<double> beta_bound() const { return beta_bound_; }
  DensityPair with_bounds(std::optional<double> alpha_max, std::optional<double> beta_max) const;

  /// Same α, β multiplied by c > 0.
  DensityPair scaled_beta(double c) const;

  std::string describe() const;

 private:
  FieldPtr alpha_, beta_;
  std::optional<double> alpha_const_, beta_const_;
  std::optional<double> alpha_bound_, beta_bound_;
};

struct MassEstimate {
  double volume = 0.0;
  double surface = 0.0;
  double volume_error = 0.0;  ///< |fine − coarse|
  double surface_error = 0.0;
  double total() const { return volume + surface; }
};

/// μ = αλ + βσ on a fixed geometry with its quadrature rules.
class ReferenceMeasure {
 public:
  ReferenceMeasure(DensityPair pair, GeometryPtr geom, QuadratureSpec spec = {});

  const DensityPair& pair() const { return pair_; }
  const DomainGeometry& geometry() const { return *geom_; }
  const GeometryPtr& geometry_ptr() const { return geom_; }
  const QuadratureSpec& spec() const { return spec_; }
  const QuadratureRule& rule() const { return rule_; }

  /// Masses from the fine rule with the coarse/fine gap as error estimate.
  const MassEstimate& raw_masses() const { return masses_; }

  /// ∫_Ω f α dλ.
  double integrate_volume(const std::function<double(const Vec&)>& f) const;
  /// ∫_Γ f β dσ.
  double integrate_surface(const std::function<double(const Vec&)>& f) const;
  /// ∫ f dμ / μ(Ω̄).
  double mean(const std::function<double(const Vec&)>& f) const;

 private:
  DensityPair pair_;
  GeometryPtr geom_;
  QuadratureSpec spec_;
  QuadratureRule rule_;
  MassEstimate masses_;
};

/// (μ(Ω), μ(Γ)); throws QuadratureNotConverged when the coarse and fine
/// rules disagree by more than spec.rel_tol relative to the total.
MassEstimate mu_masses(const ReferenceMeasure& measure);

/// Component restriction for occupation predictions: G = {x : component_of(x) == id}.
struct ComponentSpec {
  const ComponentMap* map = nullptr;
  int component = -1;
  bool contains(const Vec& x) const { return map == nullptr || map->component_of(x) == component; }
};

/// μ(G ∩ Γ)/μ(G); G defaults to Ω̄.
double predicted_occupation_fraction(const ReferenceMeasure& measure, const ComponentSpec& g = {});

enum class ConditionLevel { kConstruction, kAnalysis, kFeller };
enum class CheckStatus { kPass, kFail, kNotCheckable };

struct ConditionCheck {
  std::string name;
  CheckStatus status = CheckStatus::kNotCheckable;
  std::string evidence;
};

struct ValidationReport {
  ConditionLevel level = ConditionLevel::kConstruction;
  std::vector<ConditionCheck> checks;
  bool passed() const;
  /// First failing check, or nullptr.
  const ConditionCheck* first_failure() const;
  std::string summary() const;
};

struct ValidationOptions {
  int delta = 1;
  ZeroSet zeros;
  double lp_exponent = 0.0;    ///< p of the integrability screen; 0 picks max(2, ⌊d/2⌋ + 1)
  int continuity_segments = 2000;
  std::uint64_t seed = 12345;  ///< fixed so reports are reproducible
  QuadratureSpec quadrature{128, 32, 32, 1e-6};
};

ValidationReport validate_conditions(const DensityPair& pair, const DomainGeometry& geom,
                                     ConditionLevel level, const ValidationOptions& options = {});

ConditionLevel parse_condition_level(std::string_view s);
std::string to_string(ConditionLevel level);
std::string to_string(CheckStatus status);

struct CapacityScreen {
  bool pass = true;
  double exponent = 0.0;       ///< fitted growth exponent of μ(B_r(Z)) in r
  std::vector<double> radii;
  std::vector<double> masses;  ///< μ(B_r(Z)) per radius
  std::string evidence;
};

/// Fits μ(B_r(Z)) ≈ C r^s over a dyadic radius grid; passes iff s ≥ 2 − slack.
CapacityScreen capacity_screen(const ReferenceMeasure& measure, const ZeroSet& zeros);

struct InvariantSample {
  Vec x;
  bool on_boundary = false;
};

/// i.i.d. draws from μ/μ(Ω̄) by rejection against the density bounds.
/// Throws EnvelopeUnknown when a non-constant density has no bound.
std::vector<InvariantSample> sample_invariant(const ReferenceMeasure& measure, RngStream& rng,
                                              std::size_t count);
InvariantSample sample_invariant_one(const ReferenceMeasure& measure, RngStream& rng);

}  // namespace sticky
