#pragma once

#include "sticky/measures.hpp"
#include "sticky/observables.hpp"
#include "sticky/schemes.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sticky {

/// Library version written into manifests.
std::string software_version();
/// Compiler, OS and architecture of this build.
std::string platform_fingerprint();

/// Settings of the observables a subcommand reports.
struct AnalysisConfig {
  double burn_in = -1.0;  ///< physical time discarded before averaging; negative means 5% of the horizon
  int batches = 50;
  double sigma = 4.0;
  double tolerance = 0.0;  ///< absolute slack next to sigma·SE for target comparisons
  double stickiness_threshold = 0.0;
  std::vector<std::string> functions;  ///< ergodic averages, expression grammar
  std::vector<double> ks_times;        ///< compare-schemes marginal times; empty means {horizon}
  double ks_threshold_a = 0.02;
  double ks_threshold_b = 0.03;
  int geometry_points = 10000;
  int generator_points = 1000;

  Window window(double horizon) const;
};

/// Command-line overrides applied on top of a scenario file.
struct Overrides {
  std::optional<int> paths;
  std::optional<double> horizon;
  std::optional<double> dt;
  std::optional<std::uint64_t> seed;
  std::optional<SchemeKind> scheme;
  std::optional<double> sigma;

  bool empty() const;
};

struct RunConfig {
  Scenario scenario;
  AnalysisConfig analysis;
  std::string source;  ///< scenario text as read
  std::string origin;  ///< file name or "<string>"
  Overrides overrides;
  ValidationReport conditions;
};

/// Parses scenario text (YAML). Throws ParseError with the offending line and
/// column, or ValidationError naming the violated rule. Validation runs before
/// anything is simulated.
RunConfig parse_run_config(std::string_view text, std::string origin = "<string>", const Overrides& ov = {});
RunConfig load_run_config(const std::filesystem::path& path, const Overrides& ov = {});
/// Scenario part of load_run_config.
Scenario load_scenario(const std::filesystem::path& path);

/// Geometry sampling, scenario rules, density conditions at the scenario's
/// level and the capacity screen for declared zero sets. Throws ValidationError.
ValidationReport validate_scenario(const Scenario& scn);

/// One-line description used in CSV headers.
std::string describe_scenario(const Scenario& scn);

struct PathRecord {
  std::uint32_t id = 0;
  std::array<std::uint32_t, 3> stream{};  ///< Philox key words and stream id; substreams are fixed tags
  std::uint64_t steps = 0;
  std::uint64_t boundary_events = 0;
  std::uint64_t halvings = 0;
  std::uint64_t rejections = 0;
  bool aborted = false;
};

struct RunManifest {
  std::string command;
  std::string scenario_source;
  std::string scenario_origin;
  Overrides overrides;
  std::string software_version;
  std::string platform;
  std::uint64_t seed = 0;
  std::string stream_layout;
  std::vector<PathRecord> paths;
  std::uint64_t total_steps = 0;
  double wall_seconds = 0.0;  ///< not part of any reproducibility comparison
  int workers = 1;
  std::vector<ObservableReport> verdicts;
  std::vector<std::string> outputs;
  int exit_code = 0;
};

std::string serialize_manifest(const RunManifest& m);
/// Inverse of serialize_manifest. Throws ParseError.
RunManifest parse_manifest(std::string_view text);
RunManifest read_manifest(const std::filesystem::path& path);

/// path_id, t, x1..xd, on_boundary, L_t; a comment line echoes the scenario.
void write_trajectories_csv(const std::filesystem::path& path, const Scenario& scn,
                            const std::vector<Trajectory>& trs);
void write_report_csv(const std::filesystem::path& path, const std::vector<ObservableReport>& reports);

struct CommandResult {
  int exit_code = 0;
  std::vector<ObservableReport> reports;
  RunManifest manifest;
  std::string first_failure;  ///< name of the first failed verdict, empty on success
};

/// Subcommands: simulate, occupation, ergodic, verify-geometry,
/// verify-generator, compare-schemes, surface-bm. Writes report.csv,
/// manifest.json and (simulate) trajectories.csv into out_dir.
CommandResult run_command(std::string_view command, const RunConfig& cfg, const std::filesystem::path& out_dir,
                          int workers = 0);

/// Re-runs the command recorded in a manifest.
CommandResult rerun_manifest(const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
                             int workers = 0);

const std::vector<std::string>& command_names();

}  // namespace sticky
