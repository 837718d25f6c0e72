#include "sticky/cli_io.hpp"
#include "sticky/oracle.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <vector>

namespace py = pybind11;
using namespace sticky;

namespace {

py::dict report_dict(const ObservableReport& r) {
  py::dict d;
  d["name"] = r.name;
  d["estimate"] = r.estimate;
  d["std_error"] = r.std_error;
  d["n_effective"] = r.n_effective;
  d["target"] = r.target ? py::cast(*r.target) : py::none();
  d["tolerance"] = r.tolerance;
  d["sigma"] = r.sigma;
  d["verdict"] = r.verdict;
  d["note"] = r.target_note;
  return d;
}

Overrides overrides(std::optional<int> paths, std::optional<double> horizon, std::optional<double> dt,
                    std::optional<std::uint64_t> seed, std::optional<std::string> scheme) {
  Overrides ov;
  ov.paths = paths;
  ov.horizon = horizon;
  ov.dt = dt;
  ov.seed = seed;
  if (scheme) ov.scheme = parse_scheme(*scheme);
  return ov;
}

py::dict run(const std::string& command, const std::string& scenario, const std::string& out,
             std::optional<int> paths, std::optional<double> horizon, std::optional<double> dt,
             std::optional<std::uint64_t> seed, std::optional<std::string> scheme, int workers) {
  const RunConfig cfg = load_run_config(scenario, overrides(paths, horizon, dt, seed, scheme));
  CommandResult res;
  {
    py::gil_scoped_release release;
    res = run_command(command, cfg, out, workers);
  }
  py::list reports;
  for (const auto& r : res.reports) reports.append(report_dict(r));
  py::dict d;
  d["exit_code"] = res.exit_code;
  d["reports"] = reports;
  d["first_failure"] = res.first_failure;
  return d;
}

py::dict simulate_path(const std::string& scenario, std::uint32_t path_id, std::optional<double> horizon,
                       std::optional<std::string> scheme) {
  Scenario s = load_scenario(scenario);
  if (horizon) s.horizon = *horizon;
  if (scheme) s.scheme = parse_scheme(*scheme);
  const EnsembleContext ctx(s);
  Trajectory tr;
  {
    py::gil_scoped_release release;
    tr = run_path(s, path_id, ctx.start_of(path_id));
  }
  py::dict d;
  d["dim"] = tr.dim;
  d["times"] = tr.times;
  d["coords"] = tr.coords;
  d["on_boundary"] = std::vector<int>(tr.on_boundary.begin(), tr.on_boundary.end());
  d["local_time"] = tr.local_time;
  d["aborted"] = tr.aborted;
  return d;
}

py::dict masses(const std::string& scenario) {
  const Scenario s = load_scenario(scenario);
  const ReferenceMeasure m(s.pair, s.geom, s.quadrature);
  const MassEstimate e = mu_masses(m);
  py::dict d;
  d["volume"] = e.volume;
  d["surface"] = e.surface;
  d["occupation"] = predicted_occupation_fraction(m);
  return d;
}

}  // namespace

PYBIND11_MODULE(_stickysim, m) {
  m.doc() = "Sticky reflected diffusion simulator";
  m.attr("__version__") = software_version();

  // translators are tried newest first, so the base class goes in first
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  m.def("commands", &command_names);
  m.def("run", &run, py::arg("command"), py::arg("scenario"), py::arg("out"), py::arg("paths") = py::none(),
        py::arg("horizon") = py::none(), py::arg("dt") = py::none(), py::arg("seed") = py::none(),
        py::arg("scheme") = py::none(), py::arg("workers") = 0,
        "Run a subcommand on a scenario file; writes report.csv and manifest.json into out.");
  m.def(
      "rerun",
      [](const std::string& manifest, const std::string& out, int workers) {
        const auto res = rerun_manifest(manifest, out, workers);
        py::list reports;
        for (const auto& r : res.reports) reports.append(report_dict(r));
        return py::make_tuple(res.exit_code, reports);
      },
      py::arg("manifest"), py::arg("out"), py::arg("workers") = 0);
  m.def("simulate_path", &simulate_path, py::arg("scenario"), py::arg("path_id") = 0,
        py::arg("horizon") = py::none(), py::arg("scheme") = py::none());
  m.def("masses", &masses, py::arg("scenario"), "μ(Ω), μ(Γ) and the predicted occupation fraction.");
  m.def("validate", [](const std::string& scenario) { return validate_scenario(load_scenario(scenario)).summary(); },
        py::arg("scenario"));
  m.def("sticky_atom", &sticky_atom, py::arg("gamma"), py::arg("T"));
  m.def("sticky_cdf", &sticky_cdf, py::arg("gamma"), py::arg("T"), py::arg("x"));
}
