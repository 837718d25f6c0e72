#include "sticky/cli_io.hpp"

#include "sticky/generator.hpp"
#include "sticky/oracle.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#ifndef STICKY_VERSION
#define STICKY_VERSION "0.0.0"
#endif

namespace sticky {

using json = nlohmann::json;

std::string software_version() { return STICKY_VERSION; }

std::string platform_fingerprint() {
  std::string compiler;
#if defined(__clang__)
  compiler = fmt::format("clang {}.{}.{}", __clang_major__, __clang_minor__, __clang_patchlevel__);
#elif defined(__GNUC__)
  compiler = fmt::format("gcc {}.{}.{}", __GNUC__, __GNUC_MINOR__, __GNUC_PATCHLEVEL__);
#else
  compiler = "unknown compiler";
#endif
#if defined(__linux__)
  const char* os = "linux";
#elif defined(__APPLE__)
  const char* os = "darwin";
#elif defined(_WIN32)
  const char* os = "windows";
#else
  const char* os = "unknown-os";
#endif
#if defined(__x86_64__) || defined(_M_X64)
  const char* arch = "x86_64";
#elif defined(__aarch64__)
  const char* arch = "aarch64";
#else
  const char* arch = "unknown-arch";
#endif
  return fmt::format("{} / {} / {}", compiler, os, arch);
}

Window AnalysisConfig::window(double horizon) const {
  if (burn_in < 0.0) return default_window(horizon);
  return {burn_in, horizon};
}

bool Overrides::empty() const { return !paths && !horizon && !dt && !seed && !scheme && !sigma; }

// -------------------------------------------------------------------------
// Scenario files

namespace {

[[noreturn]] void fail_at(const YAML::Mark& m, const std::string& msg) {
  if (m.is_null()) throw ParseError(msg, 0, 0);
  throw ParseError(msg, m.line + 1, m.column + 1);
}

[[noreturn]] void fail_at(const YAML::Node& n, const std::string& msg) { fail_at(n.Mark(), msg); }

void check_keys(const YAML::Node& n, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!n.IsMap()) fail_at(n, where + " must be a table");
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      fail_at(kv.first, fmt::format("unknown key '{}' in {}", key, where));
  }
}

template <class T>
T get(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) fail_at(n, what + " must be a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    if constexpr (std::is_integral_v<T>)
      fail_at(n, what + " must be an integer");
    else if constexpr (std::is_floating_point_v<T>)
      fail_at(n, what + " must be a number");
    else
      fail_at(n, what + " has the wrong type");
  }
}

template <class T>
void get_opt(const YAML::Node& parent, const char* key, T& out, const std::string& where) {
  if (const auto n = parent[key]) out = get<T>(n, where + "." + key);
}

std::vector<double> get_list(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) fail_at(n, what + " must be a list");
  std::vector<double> v;
  for (const auto& e : n) v.push_back(get<double>(e, what));
  return v;
}

Vec get_vec(const YAML::Node& n, const std::string& what, int dim) {
  const auto v = get_list(n, what);
  if (static_cast<int>(v.size()) != dim) fail_at(n, fmt::format("{} must have {} entries", what, dim));
  Vec out(dim);
  for (int i = 0; i < dim; ++i) out[i] = v[static_cast<std::size_t>(i)];
  return out;
}

// Expression errors carry a column inside the expression; shift it to the file.
template <class Fn>
auto with_expression_position(const YAML::Node& n, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    const auto m = n.Mark();
    const int quote = n.Tag() == "!" ? 1 : 0;
    throw ParseError(std::string(e.what()).substr(0, std::string(e.what()).rfind(" (line")), m.line + 1,
                     m.column + quote + e.column());
  }
}

GeometryPtr parse_domain(const YAML::Node& n) {
  check_keys(n, {"surface", "level", "dim", "bbox", "center", "boundary_tolerance", "fd_step"}, "domain");
  GeometryPtr g;
  if (const auto s = n["surface"]) {
    if (n["level"]) fail_at(n["level"], "domain takes either 'surface' or 'level', not both");
    const auto name = get<std::string>(s, "domain.surface");
    g = with_expression_position(s, [&] { return make_zoo_geometry(name); });
  } else if (const auto lv = n["level"]) {
    if (!n["dim"]) fail_at(n, "domain.level needs 'dim'");
    if (!n["bbox"]) fail_at(n, "domain.level needs 'bbox' as [[lo...], [hi...]]");
    const int d = get<int>(n["dim"], "domain.dim");
    if (d < 1 || d > kMaxDim) fail_at(n["dim"], fmt::format("domain.dim must be between 1 and {}", kMaxDim));
    const auto bb = n["bbox"];
    if (!bb.IsSequence() || bb.size() != 2) fail_at(bb, "domain.bbox must be [[lo...], [hi...]]");
    const Vec lo = get_vec(bb[0], "domain.bbox lower corner", d);
    const Vec hi = get_vec(bb[1], "domain.bbox upper corner", d);
    if (!((hi - lo).minCoeff() > 0.0)) fail_at(bb, "domain.bbox must have lo < hi in every coordinate");
    std::optional<Vec> center;
    if (const auto c = n["center"]) center = get_vec(c, "domain.center", d);
    const auto src = get<std::string>(lv, "domain.level");
    g = with_expression_position(lv, [&] { return make_expression_geometry(src, d, lo, hi, center); });
  } else {
    fail_at(n, "domain needs 'surface' or 'level'");
  }
  GeometryTolerances tol;
  tol.grad_floor = 0.0;
  tol.max_newton = 0;
  bool custom = false;
  if (const auto t = n["boundary_tolerance"]) {
    tol.boundary = get<double>(t, "domain.boundary_tolerance");
    if (!(tol.boundary > 0.0)) fail_at(t, "domain.boundary_tolerance must be positive");
    custom = true;
  }
  if (const auto t = n["fd_step"]) {
    tol.fd_step = get<double>(t, "domain.fd_step");
    if (!(tol.fd_step > 0.0)) fail_at(t, "domain.fd_step must be positive");
    custom = true;
  }
  return custom ? g->with_tolerances(tol) : g;
}

DensityPair parse_density(const YAML::Node& n, int dim) {
  check_keys(n, {"alpha", "beta", "potential", "alpha_max", "beta_max"}, "density");
  if (n["alpha"] && n["potential"]) fail_at(n["potential"], "density takes either 'alpha' or 'potential'");
  std::string beta = "1";
  if (const auto b = n["beta"]) beta = get<std::string>(b, "density.beta");
  auto beta_field = [&] {
    if (const auto b = n["beta"]) return with_expression_position(b, [&] { return expression_field(beta, dim); });
    return expression_field(beta, dim);
  };
  FieldPtr alpha;
  if (const auto p = n["potential"]) {
    const auto src = "exp(-(" + get<std::string>(p, "density.potential") + "))";
    alpha = with_expression_position(p, [&] { return expression_field(src, dim); });
  } else if (const auto a = n["alpha"]) {
    const auto src = get<std::string>(a, "density.alpha");
    alpha = with_expression_position(a, [&] { return expression_field(src, dim); });
  } else {
    alpha = expression_field("1", dim);
  }
  DensityPair pair(alpha, beta_field());
  std::optional<double> amax = pair.alpha_bound(), bmax = pair.beta_bound();
  if (const auto a = n["alpha_max"]) amax = get<double>(a, "density.alpha_max");
  if (const auto b = n["beta_max"]) bmax = get<double>(b, "density.beta_max");
  return pair.with_bounds(amax, bmax);
}

ZeroSet parse_zeros(const YAML::Node& n, int dim) {
  if (!n.IsSequence()) fail_at(n, "zeros must be a list of point/plane/sphere entries");
  ZeroSet z;
  for (const auto& e : n) {
    check_keys(e, {"point", "plane", "sphere"}, "zeros entry");
    if (e.size() != 1) fail_at(e, "each zeros entry holds exactly one primitive");
    ZeroPrimitive p;
    if (const auto pt = e["point"]) {
      p.kind = ZeroPrimitive::Kind::kPoint;
      p.center = get_vec(pt, "zeros.point", dim);
    } else if (const auto pl = e["plane"]) {
      check_keys(pl, {"normal", "offset"}, "zeros.plane");
      p.kind = ZeroPrimitive::Kind::kPlane;
      if (!pl["normal"]) fail_at(pl, "zeros.plane needs 'normal'");
      p.normal = get_vec(pl["normal"], "zeros.plane.normal", dim);
      const double len = p.normal.norm();
      if (!(len > 0.0)) fail_at(pl["normal"], "zeros.plane.normal must be non-zero");
      double off = 0.0;
      get_opt(pl, "offset", off, "zeros.plane");
      p.normal /= len;
      p.offset = off / len;
      p.center = p.normal * p.offset;
    } else {
      const auto sp = e["sphere"];
      check_keys(sp, {"center", "radius"}, "zeros.sphere");
      p.kind = ZeroPrimitive::Kind::kSphere;
      if (!sp["center"] || !sp["radius"]) fail_at(sp, "zeros.sphere needs 'center' and 'radius'");
      p.center = get_vec(sp["center"], "zeros.sphere.center", dim);
      p.radius = get<double>(sp["radius"], "zeros.sphere.radius");
      if (!(p.radius > 0.0)) fail_at(sp["radius"], "zeros.sphere.radius must be positive");
    }
    z.primitives.push_back(p);
  }
  return z;
}

void parse_simulation(const YAML::Node& n, Scenario& s) {
  check_keys(n,
             {"scheme", "dt", "horizon", "dt_out", "output_times", "paths", "seed", "h_stick", "max_halvings",
              "internal_budget"},
             "simulation");
  if (const auto sc = n["scheme"]) {
    try {
      s.scheme = parse_scheme(get<std::string>(sc, "simulation.scheme"));
    } catch (const ValidationError& e) {
      fail_at(sc, e.what());
    }
  }
  get_opt(n, "dt", s.dt, "simulation");
  get_opt(n, "horizon", s.horizon, "simulation");
  get_opt(n, "dt_out", s.dt_out, "simulation");
  if (const auto o = n["output_times"]) s.output_times = get_list(o, "simulation.output_times");
  get_opt(n, "paths", s.n_paths, "simulation");
  get_opt(n, "seed", s.seed, "simulation");
  get_opt(n, "h_stick", s.h_stick, "simulation");
  get_opt(n, "max_halvings", s.max_halvings, "simulation");
  get_opt(n, "internal_budget", s.internal_budget, "simulation");
}

void parse_analysis(const YAML::Node& n, AnalysisConfig& a) {
  check_keys(n,
             {"burn_in", "batches", "sigma", "tolerance", "stickiness_threshold", "functions", "ks_times",
              "ks_threshold", "geometry_points", "generator_points"},
             "analysis");
  get_opt(n, "burn_in", a.burn_in, "analysis");
  get_opt(n, "batches", a.batches, "analysis");
  get_opt(n, "sigma", a.sigma, "analysis");
  get_opt(n, "tolerance", a.tolerance, "analysis");
  get_opt(n, "stickiness_threshold", a.stickiness_threshold, "analysis");
  get_opt(n, "geometry_points", a.geometry_points, "analysis");
  get_opt(n, "generator_points", a.generator_points, "analysis");
  if (const auto f = n["functions"]) {
    if (!f.IsSequence()) fail_at(f, "analysis.functions must be a list of expressions");
    for (const auto& e : f) a.functions.push_back(get<std::string>(e, "analysis.functions"));
  }
  if (const auto k = n["ks_times"]) a.ks_times = get_list(k, "analysis.ks_times");
  if (const auto k = n["ks_threshold"]) {
    const auto v = get_list(k, "analysis.ks_threshold");
    if (v.size() != 2) fail_at(k, "analysis.ks_threshold is [time_change, direct_sticky]");
    a.ks_threshold_a = v[0];
    a.ks_threshold_b = v[1];
  }
  if (a.batches < 20) fail_at(n["batches"], "analysis.batches must be at least 20");
  if (!(a.sigma > 0.0)) fail_at(n["sigma"], "analysis.sigma must be positive");
}

void apply(const Overrides& ov, RunConfig& cfg) {
  auto& s = cfg.scenario;
  if (ov.paths) s.n_paths = *ov.paths;
  if (ov.horizon) s.horizon = *ov.horizon;
  if (ov.dt) s.dt = *ov.dt;
  if (ov.seed) s.seed = *ov.seed;
  if (ov.scheme) s.scheme = *ov.scheme;
  if (ov.sigma) cfg.analysis.sigma = *ov.sigma;
}

}  // namespace

RunConfig parse_run_config(std::string_view text, std::string origin, const Overrides& ov) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root.IsMap()) throw ParseError("scenario must be a table of settings", 1, 1);
  check_keys(root,
             {"name", "domain", "density", "delta", "start", "zeros", "simulation", "quadrature", "validation",
              "analysis"},
             "scenario");

  RunConfig cfg;
  cfg.source = std::string(text);
  cfg.origin = std::move(origin);
  cfg.overrides = ov;
  Scenario& s = cfg.scenario;
  get_opt(root, "name", s.name, "scenario");
  if (!root["domain"]) fail_at(root, "scenario needs a 'domain' table");
  s.geom = parse_domain(root["domain"]);
  const int d = s.geom->dim();
  s.pair = root["density"] ? parse_density(root["density"], d) : DensityPair::uniform(d);
  get_opt(root, "delta", s.delta, "scenario");
  if (const auto st = root["start"]) {
    if (st.IsScalar() && st.as<std::string>() == "mu") {
      s.start_from_mu = true;
      s.start = Vec::Zero(d);
    } else {
      s.start = get_vec(st, "start", d);
    }
  } else {
    s.start = s.geom->center();
  }
  if (const auto z = root["zeros"]) s.zeros = parse_zeros(z, d);
  if (const auto sim = root["simulation"]) parse_simulation(sim, s);
  if (const auto q = root["quadrature"]) {
    check_keys(q, {"angular", "polar", "radial", "rel_tol"}, "quadrature");
    get_opt(q, "angular", s.quadrature.angular, "quadrature");
    get_opt(q, "polar", s.quadrature.polar, "quadrature");
    get_opt(q, "radial", s.quadrature.radial, "quadrature");
    get_opt(q, "rel_tol", s.quadrature.rel_tol, "quadrature");
  }
  if (const auto v = root["validation"]) {
    try {
      s.validation_level = parse_condition_level(get<std::string>(v, "validation"));
    } catch (const ValidationError& e) {
      fail_at(v, e.what());
    }
  }
  if (const auto a = root["analysis"]) parse_analysis(a, cfg.analysis);
  apply(ov, cfg);
  cfg.conditions = validate_scenario(s);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, const Overrides& ov) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string(), 0, 0);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_run_config(ss.str(), path.filename().string(), ov);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + std::string(e.what()).substr(0, std::string(e.what()).rfind(" (line")),
                     e.line(), e.column());
  }
}

Scenario load_scenario(const std::filesystem::path& path) { return load_run_config(path).scenario; }

namespace {

std::vector<Vec> boundary_samples(const DomainGeometry& geom, int count, std::uint64_t seed) {
  std::vector<Vec> pts;
  if (geom.dim() == 1) {
    const auto [a, b] = geom.interval();
    pts.push_back(Vec::Constant(1, a));
    pts.push_back(Vec::Constant(1, b));
    return pts;
  }
  RngStream rng(seed, 0, substream::kSampling);
  const int d = geom.dim();
  pts.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Vec dir(d);
    for (int i = 0; i < d; ++i) dir[i] = rng.normal();
    dir /= dir.norm();
    pts.push_back(project_to_boundary(geom, Vec(geom.center() + geom.ray_radius(dir) * dir)));
  }
  return pts;
}

struct FrameErrors {
  double unit = 0.0, idempotent = 0.0, normal = 0.0, trace = 0.0;
  double max() const { return std::max({unit, idempotent, normal, trace}); }
};

FrameErrors frame_errors(const DomainGeometry& geom, const std::vector<Vec>& pts) {
  FrameErrors e;
  const int d = geom.dim();
  for (const auto& x : pts) {
    const BoundaryFrame f = boundary_frame(geom, x);
    e.unit = std::max(e.unit, std::abs(f.normal.norm() - 1.0));
    e.idempotent = std::max(e.idempotent, (f.projection * f.projection - f.projection).cwiseAbs().maxCoeff());
    e.normal = std::max(e.normal, (f.projection * f.normal).cwiseAbs().maxCoeff());
    e.trace = std::max(e.trace, std::abs(f.projection.trace() - (d - 1)));
  }
  return e;
}

}  // namespace

ValidationReport validate_scenario(const Scenario& scn) {
  scn.validate();
  const auto& geom = *scn.geom;
  try {
    const auto pts = boundary_samples(geom, 64, 1);
    const double err = frame_errors(geom, pts).max();
    if (!(err <= 1e-8))
      throw ValidationError(fmt::format("geometry: boundary frame invariants violated by {:.3g}", err));
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError(std::string("geometry: ") + e.what());
  }
  ValidationOptions vo;
  vo.delta = scn.delta;
  vo.zeros = scn.zeros;
  ValidationReport report = validate_conditions(scn.pair, geom, scn.validation_level, vo);
  if (const auto* bad = report.first_failure())
    throw ValidationError(fmt::format("{} fails: {}", bad->name, bad->evidence));
  if (!scn.zeros.empty()) {
    const ReferenceMeasure m(scn.pair, scn.geom, scn.quadrature);
    const CapacityScreen cap = capacity_screen(m, scn.zeros);
    report.checks.push_back(
        {"capacity screen", cap.pass ? CheckStatus::kPass : CheckStatus::kFail, cap.evidence});
    if (!cap.pass) throw ValidationError("capacity screen fails: " + cap.evidence);
  }
  return report;
}

std::string describe_scenario(const Scenario& s) {
  std::string start = "mu";
  if (!s.start_from_mu) {
    start = "(";
    for (Eigen::Index i = 0; i < s.start.size(); ++i) start += fmt::format("{}{:.17g}", i ? "," : "", s.start[i]);
    start += ")";
  }
  return fmt::format("name={} domain={} density=[{}] delta={} start={} scheme={} dt={:.17g} horizon={:.17g} "
                     "dt_out={:.17g} paths={} seed={}",
                     s.name, s.geom->name(), s.pair.describe(), s.delta, start, to_string(s.scheme), s.dt,
                     s.horizon, s.effective_dt_out(), s.n_paths, s.seed);
}

// -------------------------------------------------------------------------
// Manifest

namespace {

json overrides_json(const Overrides& o) {
  json j = json::object();
  j["paths"] = o.paths ? json(*o.paths) : json(nullptr);
  j["horizon"] = o.horizon ? json(*o.horizon) : json(nullptr);
  j["dt"] = o.dt ? json(*o.dt) : json(nullptr);
  j["seed"] = o.seed ? json(*o.seed) : json(nullptr);
  j["scheme"] = o.scheme ? json(to_string(*o.scheme)) : json(nullptr);
  j["sigma"] = o.sigma ? json(*o.sigma) : json(nullptr);
  return j;
}

Overrides overrides_from(const json& j) {
  Overrides o;
  if (!j.at("paths").is_null()) o.paths = j.at("paths").get<int>();
  if (!j.at("horizon").is_null()) o.horizon = j.at("horizon").get<double>();
  if (!j.at("dt").is_null()) o.dt = j.at("dt").get<double>();
  if (!j.at("seed").is_null()) o.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("scheme").is_null()) o.scheme = parse_scheme(j.at("scheme").get<std::string>());
  if (!j.at("sigma").is_null()) o.sigma = j.at("sigma").get<double>();
  return o;
}

json report_json(const ObservableReport& r) {
  return {{"name", r.name},
          {"estimate", r.estimate},
          {"std_error", r.std_error},
          {"n_effective", r.n_effective},
          {"target", r.target ? json(*r.target) : json(nullptr)},
          {"target_note", r.target_note},
          {"sigma", r.sigma},
          {"tolerance", r.tolerance},
          {"verdict", r.verdict}};
}

ObservableReport report_from(const json& j) {
  ObservableReport r;
  r.name = j.at("name").get<std::string>();
  r.estimate = j.at("estimate").get<double>();
  r.std_error = j.at("std_error").get<double>();
  r.n_effective = j.at("n_effective").get<double>();
  if (!j.at("target").is_null()) r.target = j.at("target").get<double>();
  r.target_note = j.at("target_note").get<std::string>();
  r.sigma = j.at("sigma").get<double>();
  r.tolerance = j.at("tolerance").get<double>();
  r.verdict = j.at("verdict").get<bool>();
  return r;
}

}  // namespace

std::string serialize_manifest(const RunManifest& m) {
  // One line per path keeps large ensembles readable.
  std::string paths = "[";
  for (std::size_t i = 0; i < m.paths.size(); ++i) {
    const auto& p = m.paths[i];
    paths += i ? ",\n  " : "\n  ";
    paths += json({p.id, p.stream, p.steps, p.boundary_events, p.halvings, p.rejections, p.aborted}).dump();
  }
  paths += m.paths.empty() ? "]" : "\n ]";
  json verdicts = json::array();
  for (const auto& r : m.verdicts) verdicts.push_back(report_json(r));
  const json j = {{"command", m.command},
                  {"scenario", {{"origin", m.scenario_origin}, {"source", m.scenario_source}}},
                  {"overrides", overrides_json(m.overrides)},
                  {"software_version", m.software_version},
                  {"platform", m.platform},
                  {"seed", m.seed},
                  {"stream_layout", m.stream_layout},
                  {"path_columns", {"id", "stream", "steps", "boundary_events", "halvings", "rejections", "aborted"}},
                  {"paths", "@paths@"},
                  {"total_steps", m.total_steps},
                  {"wall_seconds", m.wall_seconds},
                  {"workers", m.workers},
                  {"verdicts", verdicts},
                  {"outputs", m.outputs},
                  {"exit_code", m.exit_code}};
  std::string text = j.dump(1);
  const auto at = text.find("\"@paths@\"");
  text.replace(at, 9, paths);
  return text + "\n";
}

RunManifest parse_manifest(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manifest: ") + e.what(), 0, static_cast<int>(e.byte));
  }
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.scenario_origin = j.at("scenario").at("origin").get<std::string>();
    m.scenario_source = j.at("scenario").at("source").get<std::string>();
    m.overrides = overrides_from(j.at("overrides"));
    m.software_version = j.at("software_version").get<std::string>();
    m.platform = j.at("platform").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.stream_layout = j.at("stream_layout").get<std::string>();
    for (const auto& p : j.at("paths")) {
      PathRecord r;
      r.id = p.at(0).get<std::uint32_t>();
      r.stream = p.at(1).get<std::array<std::uint32_t, 3>>();
      r.steps = p.at(2).get<std::uint64_t>();
      r.boundary_events = p.at(3).get<std::uint64_t>();
      r.halvings = p.at(4).get<std::uint64_t>();
      r.rejections = p.at(5).get<std::uint64_t>();
      r.aborted = p.at(6).get<bool>();
      m.paths.push_back(r);
    }
    m.total_steps = j.at("total_steps").get<std::uint64_t>();
    m.wall_seconds = j.at("wall_seconds").get<double>();
    m.workers = j.at("workers").get<int>();
    for (const auto& r : j.at("verdicts")) m.verdicts.push_back(report_from(r));
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.exit_code = j.at("exit_code").get<int>();
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what(), 0, 0);
  }
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest " + path.string(), 0, 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

// -------------------------------------------------------------------------
// CSV

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_trajectories_csv(const std::filesystem::path& path, const Scenario& scn,
                            const std::vector<Trajectory>& trs) {
  auto out = open_out(path);
  const int d = scn.geom->dim();
  out << "# " << describe_scenario(scn) << "\n";
  out << "path_id,t";
  for (int i = 1; i <= d; ++i) out << ",x" << i;
  out << ",on_boundary,L_t\n";
  fmt::memory_buffer buf;
  for (const auto& tr : trs) {
    for (std::size_t k = 0; k < tr.size(); ++k) {
      buf.clear();
      fmt::format_to(std::back_inserter(buf), "{},{:.17g}", tr.path_id, tr.times[k]);
      for (int i = 0; i < d; ++i) fmt::format_to(std::back_inserter(buf), ",{:.17g}", tr.coords[k * d + i]);
      fmt::format_to(std::back_inserter(buf), ",{},{:.17g}\n", tr.on_boundary[k], tr.local_time[k]);
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
  }
}

void write_report_csv(const std::filesystem::path& path, const std::vector<ObservableReport>& reports) {
  auto out = open_out(path);
  out << "name,estimate,std_error,n_effective,target,tolerance,sigma,verdict,note\n";
  for (const auto& r : reports) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{},{:.17g},{:.17g},{},{}\n", csv_field(r.name), r.estimate,
                       r.std_error, r.n_effective, r.target ? fmt::format("{:.17g}", *r.target) : std::string(),
                       r.tolerance, r.sigma, r.verdict ? "pass" : "fail", csv_field(r.target_note));
  }
}

// -------------------------------------------------------------------------
// Subcommands

namespace {

struct Context {
  const RunConfig& cfg;
  int workers;
  std::vector<ObservableReport> reports;
  std::vector<PathRecord> paths;
  std::uint64_t total_steps = 0;
  std::vector<std::string> outputs;
  const std::filesystem::path& out_dir;

  BatchOptions batches() const { return {cfg.analysis.batches, 20, 10}; }
  Window window() const { return cfg.analysis.window(cfg.scenario.horizon); }

  void record(const Trajectory& tr, const Scenario& s) {
    PathRecord r;
    r.id = tr.path_id;
    r.stream = {static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32), tr.path_id};
    r.steps = tr.stats.steps;
    r.boundary_events = tr.stats.boundary_events;
    r.halvings = tr.stats.halvings;
    r.rejections = tr.stats.rejections;
    r.aborted = tr.aborted;
    total_steps += tr.stats.steps;
    paths.push_back(r);
  }
};

// Reports common to every ensemble: no aborted path, no state outside Ω̄.
void conservativeness(Context& c, const Scenario& s, std::uint64_t aborted, double max_level,
                      const std::string& first_diagnostic) {
  ObservableReport a;
  a.name = "aborted paths[" + to_string(s.scheme) + "]";
  a.estimate = static_cast<double>(aborted);
  a.n_effective = s.n_paths;
  a.against(0.0, first_diagnostic.empty() ? "conservative: no path aborts" : first_diagnostic, c.cfg.analysis.sigma);
  c.reports.push_back(a);
  ObservableReport f;
  f.name = "max F(state)[" + to_string(s.scheme) + "]";
  f.estimate = max_level;
  f.n_effective = s.n_paths;
  f.target = s.geom->tolerances().boundary;
  f.target_note = "upper bound ε_Γ";
  f.sigma = c.cfg.analysis.sigma;
  f.verdict = max_level <= *f.target;
  c.reports.push_back(f);
}

struct PathSummary {
  std::vector<BatchSeries> series;
  PathRecord record;
  double max_level = 0.0;
  double max_sojourn = 0.0;
  bool aborted = false;
  std::string diagnostic;
  std::vector<double> values;
};

PathSummary summarize(const Trajectory& tr, const Scenario& s) {
  PathSummary p;
  p.record.id = tr.path_id;
  p.record.stream = {static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32), tr.path_id};
  p.record.steps = tr.stats.steps;
  p.record.boundary_events = tr.stats.boundary_events;
  p.record.halvings = tr.stats.halvings;
  p.record.rejections = tr.stats.rejections;
  p.record.aborted = tr.aborted;
  p.max_level = tr.stats.max_level;
  p.aborted = tr.aborted;
  p.diagnostic = tr.diagnostic;
  return p;
}

void absorb(Context& c, const Scenario& s, const std::vector<PathSummary>& ps) {
  std::uint64_t aborted = 0;
  double level = -std::numeric_limits<double>::infinity();
  std::string diag;
  for (const auto& p : ps) {
    c.paths.push_back(p.record);
    c.total_steps += p.record.steps;
    level = std::max(level, p.max_level);
    if (p.aborted) {
      ++aborted;
      if (diag.empty()) diag = p.diagnostic;
    }
  }
  conservativeness(c, s, aborted, level, diag);
}

std::vector<TestFunction> analysis_functions(const RunConfig& cfg, std::vector<TestFunction> fallback) {
  if (cfg.analysis.functions.empty()) return fallback;
  std::vector<TestFunction> fs;
  for (const auto& src : cfg.analysis.functions) fs.push_back(make_test_function(src, cfg.scenario.geom->dim()));
  return fs;
}

void cmd_simulate(Context& c) {
  const Scenario& s = c.cfg.scenario;
  const auto trs = run_ensemble(s, c.workers);
  std::uint64_t aborted = 0;
  double level = -std::numeric_limits<double>::infinity();
  std::string diag;
  for (const auto& tr : trs) {
    c.record(tr, s);
    level = std::max(level, tr.stats.max_level);
    if (tr.aborted && ++aborted == 1) diag = tr.diagnostic;
  }
  write_trajectories_csv(c.out_dir / "trajectories.csv", s, trs);
  c.outputs.push_back("trajectories.csv");
  conservativeness(c, s, aborted, level, diag);
}

void cmd_occupation(Context& c) {
  const Scenario& s = c.cfg.scenario;
  const Window w = c.window();
  const BatchOptions bo = c.batches();
  const auto ps = map_paths(
      s,
      [&](const Trajectory& tr) {
        PathSummary p = summarize(tr, s);
        if (tr.aborted) return p;
        p.series.push_back(batch_series(tr, w, [&](std::size_t i) { return tr.on_boundary[i] ? 1.0 : 0.0; }, bo));
        double run_start = -1.0;
        for (std::size_t i = 0; i < tr.size(); ++i) {
          if (tr.times[i] < w.t0 || tr.times[i] >= w.t1) continue;
          if (tr.on_boundary[i]) {
            if (run_start < 0.0) run_start = tr.times[i];
            const double end = i + 1 < tr.size() ? tr.times[i + 1] : tr.times[i];
            p.max_sojourn = std::max(p.max_sojourn, end - run_start);
          } else {
            run_start = -1.0;
          }
        }
        return p;
      },
      c.workers);
  absorb(c, s, ps);
  std::vector<BatchSeries> series;
  double sojourn = 0.0;
  for (const auto& p : ps) {
    if (!p.series.empty()) series.push_back(p.series[0]);
    sojourn = std::max(sojourn, p.max_sojourn);
  }
  if (series.empty()) throw HorizonNotReached("every path aborted; no occupation estimate");

  const ReferenceMeasure measure(s.pair, s.geom, s.quadrature);
  std::unique_ptr<ComponentMap> map;
  ComponentSpec g;
  if (!s.zeros.empty() && !s.start_from_mu) {
    map = std::make_unique<ComponentMap>(*s.geom, s.zeros);
    g = {map.get(), map->component_of(s.start)};
  }
  const double target = predicted_occupation_fraction(measure, g);
  ObservableReport occ = pool_batches("occupation fraction", series);
  occ.against(target, g.map ? "μ(G ∩ Γ)/μ(G) on the start component" : "μ(Γ)/μ(Ω̄)", c.cfg.analysis.sigma,
              c.cfg.analysis.tolerance);
  c.reports.push_back(occ);

  ObservableReport st = occ;
  st.name = "stickiness";
  st.target.reset();
  st.sigma = c.cfg.analysis.sigma;
  const bool sticky = st.lower_bound() > c.cfg.analysis.stickiness_threshold;
  st.target_note = fmt::format("{}: occupation lower bound {:.6g} vs threshold {:g}; longest sojourn {:.6g}",
                               sticky ? "sticky" : "not sticky", st.lower_bound(),
                               c.cfg.analysis.stickiness_threshold, sojourn);
  st.verdict = true;
  c.reports.push_back(st);
}

void cmd_ergodic(Context& c) {
  const Scenario& s = c.cfg.scenario;
  const int d = s.geom->dim();
  auto fs = analysis_functions(c.cfg, {});
  if (fs.empty())
    for (auto& f : test_bank(d))
      if (f.label != "1") fs.push_back(f);
  const Window w = c.window();
  const BatchOptions bo = c.batches();
  const auto ps = map_paths(
      s,
      [&](const Trajectory& tr) {
        PathSummary p = summarize(tr, s);
        if (tr.aborted) return p;
        for (const auto& f : fs) p.series.push_back(batch_series(tr, w, [&](std::size_t i) {
          return f.value(tr.state(i));
        }, bo));
        return p;
      },
      c.workers);
  absorb(c, s, ps);
  const ReferenceMeasure measure(s.pair, s.geom, s.quadrature);
  for (std::size_t k = 0; k < fs.size(); ++k) {
    std::vector<BatchSeries> series;
    for (const auto& p : ps)
      if (!p.series.empty()) series.push_back(p.series[k]);
    if (series.empty()) throw HorizonNotReached("every path aborted; no ergodic average");
    ObservableReport r = pool_batches("ergodic[" + fs[k].label + "]", series);
    const auto& f = fs[k];
    r.against(measure.mean([&](const Vec& x) { return f.value(x); }), "∫f dμ/μ(Ω̄) by quadrature",
              c.cfg.analysis.sigma, c.cfg.analysis.tolerance);
    c.reports.push_back(r);
  }
}

ObservableReport bound_report(std::string name, double value, double bound, std::string note, double n) {
  ObservableReport r;
  r.name = std::move(name);
  r.estimate = value;
  r.n_effective = n;
  r.target = bound;
  r.target_note = std::move(note);
  r.verdict = value <= bound;
  return r;
}

void cmd_verify_geometry(Context& c) {
  const Scenario& s = c.cfg.scenario;
  const auto& geom = *s.geom;
  const auto pts = boundary_samples(geom, c.cfg.analysis.geometry_points, s.seed);
  const double n = static_cast<double>(pts.size());
  const FrameErrors fe = frame_errors(geom, pts);
  c.reports.push_back(bound_report("frame |n| − 1", fe.unit, 1e-12, "upper bound", n));
  c.reports.push_back(bound_report("frame P² − P", fe.idempotent, 1e-12, "upper bound", n));
  c.reports.push_back(bound_report("frame Pn", fe.normal, 1e-12, "upper bound", n));
  c.reports.push_back(bound_report("frame tr P − (d − 1)", fe.trace, 1e-12, "upper bound", n));
  double lemma = 0.0, level = 0.0;
  for (const auto& x : pts) {
    lemma = std::max(lemma, curvature_identity_residual(geom, x).norm());
    level = std::max(level, std::abs(geom.level(x)));
  }
  c.reports.push_back(bound_report("(P∇)ᵀP + κn", lemma, 1e-5, "upper bound", n));
  c.reports.push_back(bound_report("projection |F|", level, geom.tolerances().boundary, "upper bound ε_Γ", n));

  // Divergence theorem for V(x) = x − c: d·λ(Ω) = ∫_Γ (V, n) dσ.
  const QuadratureRule rule = build_quadrature(geom, s.quadrature);
  double vol = 0.0, flux = 0.0;
  for (const auto& q : rule.volume) vol += q.w;
  for (const auto& q : rule.surface) flux += q.w * (q.x - geom.center()).dot(outward_normal(geom, q.x));
  const double div = geom.dim() * vol;
  c.reports.push_back(
      bound_report("divergence theorem", std::abs(div - flux) / std::abs(div), 1e-6, "relative gap bound",
                   static_cast<double>(rule.volume.size() + rule.surface.size())));
}

void cmd_verify_generator(Context& c) {
  const Scenario& s = c.cfg.scenario;
  const auto& geom = *s.geom;
  const int d = geom.dim();
  const auto bank = test_bank(d);
  const int m = std::max(2, c.cfg.analysis.generator_points);
  std::vector<Vec> pts = boundary_samples(geom, m / 2, s.seed);
  RngStream rng(s.seed, 1, substream::kSampling);
  while (static_cast<int>(pts.size()) < m) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = geom.bbox_lo()[i] + rng.uniform() * (geom.bbox_hi()[i] - geom.bbox_lo()[i]);
    if (geom.level(x) < -geom.tolerances().boundary) pts.push_back(x);
  }
  double worst = 0.0;
  for (const auto& x : pts)
    for (const auto& f : bank)
      worst = std::max(worst, std::abs(apply_L(f, s.pair, geom, x, s.delta) - apply_L_split(f, s.pair, geom, x, s.delta)));
  c.reports.push_back(bound_report("compact vs split", worst, 1e-10, "upper bound",
                                   static_cast<double>(pts.size() * bank.size())));

  const ReferenceMeasure measure(s.pair, s.geom, s.quadrature);
  const std::size_t nb = bank.size();
  for (std::size_t k = 1; k <= 6; ++k) {
    const auto& f = bank[k % nb];
    const auto& g = bank[(k + 1) % nb];
    const double lhs = integrate_Lf_g(measure, f, g, s.delta);
    const double rhs = -dirichlet_form(measure, f, g, s.delta);
    c.reports.push_back(bound_report("symmetry ∫Lf·g dμ + ℰ(f,g) [" + f.label + "," + g.label + "]",
                                     std::abs(lhs - rhs), 1e-3, "upper bound",
                                     static_cast<double>(measure.rule().volume.size())));
  }
  const TestFunction one = make_test_function("1", d);
  double went = 0.0;
  for (const auto& q : measure.rule().surface)
    went = std::max(went, std::abs(wentzell_residual(one, s.pair, geom, q.x, s.delta)));
  c.reports.push_back(bound_report("wentzell[1]", went, 0.0, "constants satisfy the boundary condition",
                                   static_cast<double>(measure.rule().surface.size())));
}

std::vector<double> ks_times(const RunConfig& cfg) {
  auto t = cfg.analysis.ks_times;
  if (t.empty()) t.push_back(cfg.scenario.horizon);
  for (double x : t)
    if (!(x > 0.0) || x > cfg.scenario.horizon)
      throw ValidationError("analysis.ks_times must lie in (0, horizon]");
  return t;
}

// Marginal samples at the KS times, one column per time.
std::vector<std::vector<double>> marginals(Context& c, Scenario s, SchemeKind kind,
                                           const std::function<double(const Vec&)>& coord) {
  s.scheme = kind;
  const auto times = ks_times(c.cfg);
  s.output_times = times;
  s.dt_out = 0.0;
  const auto ps = map_paths(
      s,
      [&](const Trajectory& tr) {
        PathSummary p = summarize(tr, s);
        if (tr.aborted) return p;
        for (std::size_t k = 0; k < tr.size(); ++k) p.values.push_back(coord(tr.state(k)));
        return p;
      },
      c.workers);
  absorb(c, s, ps);
  std::vector<std::vector<double>> cols(times.size());
  for (const auto& p : ps)
    for (std::size_t k = 0; k < p.values.size() && k < cols.size(); ++k) cols[k].push_back(p.values[k]);
  return cols;
}

void cmd_compare_schemes(Context& c) {
  const Scenario& s = c.cfg.scenario;
  const auto& geom = *s.geom;
  const auto times = ks_times(c.cfg);
  const double eps = geom.tolerances().boundary;
  bool oracle = geom.dim() == 1 && s.delta == 0 && s.pair.alpha_constant() && s.pair.beta_constant() &&
                !s.start_from_mu;
  double origin = 0.0, sign = 1.0;
  if (oracle) {
    const auto [a, b] = geom.interval();
    if (std::abs(s.start[0] - a) <= eps) {
      origin = a;
    } else if (std::abs(s.start[0] - b) <= eps) {
      origin = b;
      sign = -1.0;
    } else {
      oracle = false;
    }
  }
  const auto coord = [&](const Vec& x) { return oracle ? sign * (x[0] - origin) : x[0]; };
  const auto a_cols = marginals(c, s, SchemeKind::kTimeChange, coord);
  const auto b_cols = marginals(c, s, SchemeKind::kDirectSticky, coord);
  const double sigma = c.cfg.analysis.sigma;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double T = times[k];
    if (oracle) {
      const double gamma = s.pair.alpha(s.start) / s.pair.beta(s.start);
      const auto cdf = [&](double x) { return sticky_cdf(gamma, T, x); };
      const double atom = sticky_atom(gamma, T);
      ObservableReport ra = bound_report(fmt::format("KS time_change vs oracle @T={:g}", T),
                                         ks_statistic(a_cols[k], cdf, atom, eps), c.cfg.analysis.ks_threshold_a,
                                         "upper bound", static_cast<double>(a_cols[k].size()));
      ObservableReport rb = bound_report(fmt::format("KS direct_sticky vs oracle @T={:g}", T),
                                         ks_statistic(b_cols[k], cdf, atom, eps), c.cfg.analysis.ks_threshold_b,
                                         "upper bound", static_cast<double>(b_cols[k].size()));
      ra.sigma = rb.sigma = sigma;
      c.reports.push_back(ra);
      c.reports.push_back(rb);
    } else {
      const double n = static_cast<double>(a_cols[k].size()), m = static_cast<double>(b_cols[k].size());
      // Two-sample critical value at level 1e-3, floored by the scheme threshold.
      const double crit = std::max(c.cfg.analysis.ks_threshold_b, 1.949 * std::sqrt((n + m) / (n * m)));
      ObservableReport r = bound_report(fmt::format("KS time_change vs direct_sticky @T={:g}", T),
                                        ks_two_sample(a_cols[k], b_cols[k]), crit, "upper bound", std::min(n, m));
      r.sigma = sigma;
      c.reports.push_back(r);
    }
  }
  if (oracle) {
    // The oracle sampler itself against the closed form.
    const double gamma = s.pair.alpha(s.start) / s.pair.beta(s.start);
    ExactSticky1D ex{s.pair.alpha(s.start), s.pair.beta(s.start), times.back(), times, 0.0};
    std::vector<std::vector<double>> cols(times.size());
    for (int i = 0; i < s.n_paths; ++i) {
      RngStream rng(s.seed, static_cast<std::uint32_t>(i), substream::kOracle);
      const auto path = sample_sticky_1d(ex, rng);
      for (std::size_t k = 0; k < times.size(); ++k) cols[k].push_back(path[k]);
    }
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double T = times[k];
      ObservableReport r = bound_report(
          fmt::format("KS oracle sampler vs closed form @T={:g}", T),
          ks_statistic(cols[k], [&](double x) { return sticky_cdf(gamma, T, x); }, sticky_atom(gamma, T)),
          c.cfg.analysis.ks_threshold_a, "upper bound", static_cast<double>(cols[k].size()));
      c.reports.push_back(r);
    }
  }
}

void cmd_surface_bm(Context& c) {
  Scenario s = c.cfg.scenario;
  s.scheme = SchemeKind::kSurfaceOnly;
  const auto& geom = *s.geom;
  const int d = geom.dim();
  auto fs = analysis_functions(c.cfg, {make_test_function(fmt::format("x{}^2", d), d)});
  const Window w = c.window();
  const BatchOptions bo = c.batches();
  const auto ps = map_paths(
      s,
      [&](const Trajectory& tr) {
        PathSummary p = summarize(tr, s);
        double off = 0.0;
        for (std::size_t i = 0; i < tr.size(); ++i) {
          const Vec x = tr.state(i);
          off = std::max(off, std::abs(geom.level(x)) / geom.level_gradient(x).norm());
        }
        p.values.push_back(off);
        if (tr.aborted) return p;
        for (const auto& f : fs) p.series.push_back(batch_series(tr, w, [&](std::size_t i) {
          return f.value(tr.state(i));
        }, bo));
        return p;
      },
      c.workers);
  absorb(c, s, ps);
  double off = 0.0;
  for (const auto& p : ps) off = std::max(off, p.values[0]);
  c.reports.push_back(bound_report("distance to Γ", off, 1e-6, "upper bound", static_cast<double>(ps.size())));
  const QuadratureRule rule = build_quadrature(geom, s.quadrature);
  for (std::size_t k = 0; k < fs.size(); ++k) {
    std::vector<BatchSeries> series;
    for (const auto& p : ps)
      if (!p.series.empty()) series.push_back(p.series[k]);
    if (series.empty()) throw HorizonNotReached("every path aborted; no surface average");
    double num = 0.0, den = 0.0;
    for (const auto& q : rule.surface) {
      num += q.w * fs[k].value(q.x);
      den += q.w;
    }
    ObservableReport r = pool_batches("surface average[" + fs[k].label + "]", series);
    r.against(num / den, "∫f dσ/σ(Γ) by quadrature", c.cfg.analysis.sigma, c.cfg.analysis.tolerance);
    c.reports.push_back(r);
  }
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate",         "occupation",      "ergodic",   "verify-geometry",
                                              "verify-generator", "compare-schemes", "surface-bm"};
  return names;
}

CommandResult run_command(std::string_view command, const RunConfig& cfg, const std::filesystem::path& out_dir,
                          int workers) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end())
    throw ValidationError(fmt::format("unknown subcommand '{}'", command));
  std::filesystem::create_directories(out_dir);
  const auto start = std::chrono::steady_clock::now();
  const int w = workers > 0 ? workers : worker_count();
  Context c{cfg, w, {}, {}, 0, {}, out_dir};
  if (command == "simulate") cmd_simulate(c);
  else if (command == "occupation") cmd_occupation(c);
  else if (command == "ergodic") cmd_ergodic(c);
  else if (command == "verify-geometry") cmd_verify_geometry(c);
  else if (command == "verify-generator") cmd_verify_generator(c);
  else if (command == "compare-schemes") cmd_compare_schemes(c);
  else cmd_surface_bm(c);

  write_report_csv(out_dir / "report.csv", c.reports);
  c.outputs.push_back("report.csv");

  CommandResult res;
  res.reports = c.reports;
  for (const auto& r : c.reports)
    if (!r.verdict) {
      res.first_failure = r.name;
      break;
    }
  res.exit_code = res.first_failure.empty() ? 0 : 1;

  RunManifest& m = res.manifest;
  m.command = std::string(command);
  m.scenario_source = cfg.source;
  m.scenario_origin = cfg.origin;
  m.overrides = cfg.overrides;
  m.software_version = software_version();
  m.platform = platform_fingerprint();
  m.seed = cfg.scenario.seed;
  m.stream_layout =
      "Philox4x32-10; key = master seed (low, high words); counter = (block low, block high, path id, substream); "
      "substreams 0 dynamics, 1 clock, 2 start, 3 oracle, 4 sampling";
  m.paths = std::move(c.paths);
  m.total_steps = c.total_steps;
  m.workers = w;
  m.verdicts = c.reports;
  m.outputs = c.outputs;
  m.outputs.push_back("manifest.json");
  m.exit_code = res.exit_code;
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto out = open_out(out_dir / "manifest.json");
  out << serialize_manifest(m);
  return res;
}

CommandResult rerun_manifest(const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
                             int workers) {
  const RunManifest m = read_manifest(manifest);
  const RunConfig cfg = parse_run_config(m.scenario_source, m.scenario_origin, m.overrides);
  return run_command(m.command, cfg, out_dir, workers);
}

}  // namespace sticky
