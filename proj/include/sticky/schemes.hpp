#pragma once

#include "sticky/geometry.hpp"
#include "sticky/measures.hpp"
#include "sticky/rng.hpp"
#include "sticky/zeroset.hpp"

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace sticky {

enum class SchemeKind { kTimeChange, kDirectSticky, kSurfaceOnly };

SchemeKind parse_scheme(std::string_view s);
std::string to_string(SchemeKind s);

struct Scenario {
  std::string name = "scenario";
  GeometryPtr geom;
  DensityPair pair = DensityPair::uniform(1);
  int delta = 1;
  Vec start;
  bool start_from_mu = false;  ///< draw each path's start from μ/μ(Ω̄)
  SchemeKind scheme = SchemeKind::kTimeChange;
  double dt = 1e-3;
  double horizon = 1.0;
  double dt_out = 0.0;               ///< physical output spacing; 0 means dt
  std::vector<double> output_times;  ///< explicit output times, overrides dt_out
  int n_paths = 1;
  std::uint64_t seed = 0;
  double internal_budget = 100.0;  ///< time change: max internal time as a multiple of horizon
  double h_stick = 0.0;            ///< direct scheme: 0 means √(2 dt)
  int max_halvings = 10;
  ZeroSet zeros;
  QuadratureSpec quadrature{};
  ConditionLevel validation_level = ConditionLevel::kConstruction;

  /// Throws ValidationError naming the violated rule.
  void validate() const;
  double effective_dt_out() const { return dt_out > 0.0 ? dt_out : dt; }
  double effective_h_stick() const;
  /// Output grid in physical time.
  std::vector<double> output_grid() const;
};

struct PathStats {
  std::uint64_t steps = 0;           ///< accepted internal steps
  std::uint64_t boundary_events = 0; ///< stuck segments (A) or boundary-mode steps (B, surface)
  std::uint64_t halvings = 0;
  std::uint64_t rejections = 0;      ///< steps refused at max halving depth
  double internal_time = 0.0;
  double max_level = -std::numeric_limits<double>::infinity();  ///< max F over accepted states
};

/// Output samples of one path on the physical grid.
struct Trajectory {
  int dim = 0;
  std::uint32_t path_id = 0;
  std::vector<double> times;
  std::vector<double> coords;  ///< dim values per sample
  std::vector<std::uint8_t> on_boundary;
  std::vector<double> local_time;     ///< cumulative L_t
  std::vector<double> boundary_time;  ///< cumulative physical time spent on Γ
  /// (internal time, physical time) pairs of scheme A, strictly increasing in both.
  std::vector<std::pair<double, double>> clock_map;
  PathStats stats;
  bool aborted = false;
  std::string diagnostic;

  std::size_t size() const { return times.size(); }
  Vec state(std::size_t i) const { return Eigen::Map<const Vec>(coords.data() + i * dim, dim); }
};

/// Euler–Maruyama interior step x + √dt ξ + ½∇ln α dt. Throws ZeroAlpha.
Vec step_interior(const Vec& x, const DensityPair& pair, double dt, const Vec& noise);

struct ReflectedStep {
  Vec state;
  double dL = 0.0;  ///< twice the penetration depth of the proposal y, the discrete |y| − y
  bool contact = false;
};

/// Projection scheme for the normally reflected diffusion. In d = 1 the
/// proposal is mirrored at the crossed endpoint, otherwise projected onto Γ.
/// The time-change runner continues from the mirror image below the final
/// contact point in every dimension.
ReflectedStep reflected_step(const Vec& x, const DensityPair& pair, const DomainGeometry& geom, double dt,
                             const Vec& noise);

/// One projected Euler step on Γ: x + P√dt ξ + (½P∇ln β − ½κn)dt, the β term
/// only when `beta_drift` is set.
Vec surface_step(const Vec& x, const DensityPair& pair, const DomainGeometry& geom, double dt, const Vec& noise,
                 bool beta_drift);

Trajectory run_time_change(const Scenario& scn, std::uint32_t path_id = 0,
                           const std::optional<Vec>& start = std::nullopt);
Trajectory run_direct_sticky(const Scenario& scn, std::uint32_t path_id = 0,
                             const std::optional<Vec>& start = std::nullopt);
Trajectory run_surface_only(const Scenario& scn, std::uint32_t path_id = 0,
                            const std::optional<Vec>& start = std::nullopt);
/// Dispatches on scn.scheme.
Trajectory run_path(const Scenario& scn, std::uint32_t path_id, const std::optional<Vec>& start = std::nullopt);

/// Resources shared by all paths of an ensemble.
class EnsembleContext {
 public:
  explicit EnsembleContext(const Scenario& scn);
  const Scenario& scenario() const { return *scn_; }
  /// Start of path `path_id`: fixed, or drawn from μ on the path's start substream.
  Vec start_of(std::uint32_t path_id) const;
  const ReferenceMeasure* measure() const { return measure_.get(); }

 private:
  const Scenario* scn_;
  std::shared_ptr<ReferenceMeasure> measure_;
};

/// STICKY_WORKERS if set, else hardware concurrency.
int worker_count();

/// Runs every path and maps it through `fn(trajectory)`; results come back
/// in path order regardless of the worker count.
template <class Fn>
auto map_paths(const Scenario& scn, Fn&& fn, int workers = 0) {
  using R = std::invoke_result_t<Fn&, const Trajectory&>;
  scn.validate();
  const EnsembleContext ctx(scn);
  const int n = scn.n_paths;
  std::vector<std::optional<R>> slots(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        const auto id = static_cast<std::uint32_t>(i);
        const Trajectory tr = run_path(scn, id, ctx.start_of(id));
        slots[static_cast<std::size_t>(i)].emplace(fn(tr));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
      }
    }
  };
  const int w = std::max(1, std::min(workers > 0 ? workers : worker_count(), n));
  if (w == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < w; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<R> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// All trajectories of the scenario in path order.
std::vector<Trajectory> run_ensemble(const Scenario& scn, int workers = 0);

}  // namespace sticky
