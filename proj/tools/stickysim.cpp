#include "sticky/cli_io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <iostream>
#include <map>

namespace {

void print(const sticky::CommandResult& res, const std::filesystem::path& out) {
  for (const auto& r : res.reports) {
    std::string target = r.target ? fmt::format(" target {:.6g}", *r.target) : std::string();
    fmt::print("{:<4} {:<48} {:.6g} ± {:.2g}{}  {}\n", r.verdict ? "ok" : "FAIL", r.name, r.estimate, r.std_error,
               target, r.target_note);
  }
  fmt::print("outputs in {}\n", out.string());
  if (!res.first_failure.empty()) fmt::print(stderr, "failed verdict: {}\n", res.first_failure);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sticky reflected diffusion simulator"};
  app.require_subcommand(1);

  std::string scenario, out = "stickysim_out", manifest;
  std::optional<int> paths;
  std::optional<double> horizon, dt, sigma;
  std::optional<std::uint64_t> seed;
  std::string scheme;
  int workers = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("scenario_file", scenario, "scenario file (same as --scenario)");
    sub->add_option("--scenario", scenario, "scenario file");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--paths", paths, "number of paths");
    sub->add_option("--horizon", horizon, "physical horizon T");
    sub->add_option("--dt", dt, "internal step size");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--scheme", scheme, "time_change | direct_sticky | surface_only")
        ->check(CLI::IsMember({"time_change", "direct_sticky", "surface_only"}));
    sub->add_option("--sigma", sigma, "verdict width in standard errors");
    sub->add_option("--workers", workers, "worker threads (default: STICKY_WORKERS or all cores)");
  };
  const std::map<std::string, std::string> about{
      {"simulate", "write sampled paths as CSV"},
      {"occupation", "boundary share of time against μ(Γ)/μ(Ω̄)"},
      {"ergodic", "time averages of analysis.functions against their μ-averages"},
      {"verify-geometry", "frame, curvature and projection checks on sampled boundary points"},
      {"verify-generator", "compact vs split generator and μ-symmetry of the Dirichlet form"},
      {"compare-schemes", "both schemes against the exact 1D law by KS distance"},
      {"surface-bm", "Brownian motion on Γ alone: distance to Γ and surface moments"},
  };
  for (const auto& name : sticky::command_names()) {
    const auto it = about.find(name);
    add_common(app.add_subcommand(name, it == about.end() ? std::string() : it->second));
  }
  auto* rerun = app.add_subcommand("rerun", "re-run the command recorded in a manifest");
  rerun->add_option("--manifest", manifest, "manifest.json of an earlier run")->required();
  rerun->add_option("--out", out, "output directory");
  rerun->add_option("--workers", workers, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    sticky::CommandResult res;
    if (rerun->parsed()) {
      res = sticky::rerun_manifest(manifest, out, workers);
    } else {
      const std::string cmd = app.get_subcommands().front()->get_name();
      if (scenario.empty()) {
        fmt::print(stderr, "{}: a scenario file is required\n", cmd);
        return 2;
      }
      sticky::Overrides ov;
      ov.paths = paths;
      ov.horizon = horizon;
      ov.dt = dt;
      ov.seed = seed;
      ov.sigma = sigma;
      if (!scheme.empty()) ov.scheme = sticky::parse_scheme(scheme);
      const auto cfg = sticky::load_run_config(scenario, ov);
      res = sticky::run_command(cmd, cfg, out, workers);
    }
    print(res, out);
    return res.exit_code;
  } catch (const sticky::ParseError& e) {
    fmt::print(stderr, "parse error: {}\n", e.what());
    return 2;
  } catch (const sticky::ValidationError& e) {
    fmt::print(stderr, "invalid scenario: {}\n", e.what());
    return 2;
  } catch (const sticky::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  }
}
