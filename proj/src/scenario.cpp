#include "nps/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "nps/diagnostics.hpp"
#include "nps/expression.hpp"
#include "nps/io.hpp"

namespace nps {

using nlohmann::json;

namespace {

constexpr const char* kSideNames[] = {"bottom", "right", "top", "left"};

// Line of the last segment of a dotted key path, found by walking the quoted
// keys in document order. Zero when a segment cannot be located.
int line_of(std::string_view text, const std::string& path) {
  std::size_t pos = 0;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t dot = path.find('.', start);
    const std::string seg = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    const std::size_t hit = text.find("\"" + seg + "\"", pos);
    if (hit == std::string_view::npos) return 0;
    pos = hit;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  [[noreturn]] void fail(const std::string& what, const std::string& path) const {
    throw ParseError(what, line_of(text_, path), path);
  }

  void check_object(const json& j, const std::string& path) const {
    if (!j.is_object()) fail("expected an object", path);
  }

  void allow_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& path) const {
    check_object(j, path);
    for (const auto& [key, value] : j.items()) {
      (void)value;
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
        fail("unknown key '" + key + "'", join(path, key));
    }
  }

  template <class T>
  void get(const json& j, const char* key, T& out, const std::string& path) const {
    if (!j.contains(key)) return;
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception&) {
      fail("wrong value type", join(path, key));
    }
  }

  // A boundary expression given as a number or a string; parsed immediately
  // so errors carry the field context.
  void expression(const json& j, const char* key, std::string& out, const std::string& path) const {
    if (!j.contains(key)) return;
    const std::string field = join(path, key);
    const json& v = j.at(key);
    if (v.is_number()) {
      out = format_double(v.get<double>());
    } else if (v.is_string()) {
      out = v.get<std::string>();
    } else {
      fail("expected a number or an expression string", field);
    }
    Expression::parse(out, field, line_of(text_, field));
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::string_view text_;
};

BoundaryMode parse_mode(const Reader& r, const std::string& s, const std::string& path) {
  if (s == "dirichlet") return BoundaryMode::Dirichlet;
  if (s == "blocking") return BoundaryMode::Blocking;
  r.fail("mode must be 'dirichlet' or 'blocking'", path);
}

void read_side(const Reader& r, const json& j, SideConfig& side, const std::string& path) {
  r.allow_keys(j, {"gamma1", "gamma2", "w", "mode"}, path);
  r.expression(j, "gamma1", side.gamma1, path);
  r.expression(j, "gamma2", side.gamma2, path);
  r.expression(j, "w", side.w, path);
  if (j.contains("mode")) {
    std::string m;
    r.get(j, "mode", m, path);
    side.mode = parse_mode(r, m, path + ".mode");
  }
}

const char* init_name(InitKind k) {
  switch (k) {
    case InitKind::Laplace: return "laplace";
    case InitKind::Uniform: return "uniform";
    case InitKind::Random: return "random";
  }
  return "?";
}

const char* reference_name(ReferenceKind k) {
  switch (k) {
    case ReferenceKind::None: return "none";
    case ReferenceKind::PoissonBoltzmann: return "pb";
    case ReferenceKind::Steady: return "steady";
  }
  return "?";
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
    throw ParseError(e.what(), line);
  }
  const Reader r(text);
  r.allow_keys(doc, {"grid", "params", "boundary", "equilibrium", "initial", "solver", "output", "sweep"}, "");

  ScenarioConfig cfg;
  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    r.allow_keys(g, {"nx", "ny", "lx", "ly"}, "grid");
    r.get(g, "nx", cfg.grid.nx, "grid");
    r.get(g, "ny", cfg.grid.ny, "grid");
    r.get(g, "lx", cfg.grid.lx, "grid");
    r.get(g, "ly", cfg.grid.ly, "grid");
  }
  if (doc.contains("params")) {
    const json& p = doc["params"];
    r.allow_keys(p, {"d1", "d2", "eps", "nu", "kc"}, "params");
    r.get(p, "d1", cfg.params.d1, "params");
    r.get(p, "d2", cfg.params.d2, "params");
    r.get(p, "eps", cfg.params.eps, "params");
    r.get(p, "nu", cfg.params.nu, "params");
    r.get(p, "kc", cfg.params.kc, "params");
  }
  if (doc.contains("boundary")) {
    const json& b = doc["boundary"];
    r.allow_keys(b, {"default", "bottom", "right", "top", "left"}, "boundary");
    if (b.contains("default")) {
      SideConfig def;
      read_side(r, b["default"], def, "boundary.default");
      cfg.sides.fill(def);
    }
    for (Side s : kSides) {
      const char* name = kSideNames[static_cast<int>(s)];
      if (b.contains(name)) read_side(r, b[name], cfg.sides[static_cast<std::size_t>(s)], std::string("boundary.") + name);
    }
  }
  if (doc.contains("equilibrium")) {
    const json& e = doc["equilibrium"];
    r.allow_keys(e, {"mu1", "mu2"}, "equilibrium");
    cfg.equilibrium.enabled = true;
    r.get(e, "mu1", cfg.equilibrium.mu1, "equilibrium");
    r.get(e, "mu2", cfg.equilibrium.mu2, "equilibrium");
  }
  if (doc.contains("initial")) {
    const json& i = doc["initial"];
    r.allow_keys(i, {"kind", "level", "seed", "velocity_amplitude", "linf_target"}, "initial");
    if (i.contains("kind")) {
      std::string k;
      r.get(i, "kind", k, "initial");
      if (k == "laplace") cfg.initial.kind = InitKind::Laplace;
      else if (k == "uniform") cfg.initial.kind = InitKind::Uniform;
      else if (k == "random") cfg.initial.kind = InitKind::Random;
      else r.fail("kind must be 'laplace', 'uniform' or 'random'", "initial.kind");
    }
    r.get(i, "level", cfg.initial.level, "initial");
    r.get(i, "seed", cfg.initial.seed, "initial");
    r.get(i, "velocity_amplitude", cfg.initial.velocity_amplitude, "initial");
    r.get(i, "linf_target", cfg.initial.linf_target, "initial");
  }
  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    r.allow_keys(s,
                 {"tol", "elliptic_tol", "pb_tol", "dt_max", "t_end", "t_cap", "cadence", "normalize_residual",
                  "classify_tol", "noise_floor", "reference"},
                 "solver");
    SolverConfig& sc = cfg.solver;
    r.get(s, "tol", sc.tol, "solver");
    r.get(s, "elliptic_tol", sc.elliptic_tol, "solver");
    r.get(s, "pb_tol", sc.pb_tol, "solver");
    r.get(s, "dt_max", sc.dt_max, "solver");
    r.get(s, "t_end", sc.t_end, "solver");
    r.get(s, "t_cap", sc.t_cap, "solver");
    r.get(s, "cadence", sc.cadence, "solver");
    r.get(s, "normalize_residual", sc.normalize_residual, "solver");
    r.get(s, "classify_tol", sc.classify_tol, "solver");
    r.get(s, "noise_floor", sc.noise_floor, "solver");
    if (s.contains("reference")) {
      std::string k;
      r.get(s, "reference", k, "solver");
      if (k == "none") sc.reference = ReferenceKind::None;
      else if (k == "pb") sc.reference = ReferenceKind::PoissonBoltzmann;
      else if (k == "steady") sc.reference = ReferenceKind::Steady;
      else r.fail("reference must be 'none', 'pb' or 'steady'", "solver.reference");
    }
    for (auto [name, v] : {std::pair{"tol", sc.tol}, {"elliptic_tol", sc.elliptic_tol}, {"pb_tol", sc.pb_tol},
                           {"dt_max", sc.dt_max}, {"t_cap", sc.t_cap}})
      if (!(v > 0.0)) r.fail("must be positive", std::string("solver.") + name);
    if (sc.cadence < 1) r.fail("must be at least 1", "solver.cadence");
  }
  if (doc.contains("output")) {
    const json& o = doc["output"];
    r.allow_keys(o, {"dir", "vtk", "field_csv", "snapshot_times"}, "output");
    r.get(o, "dir", cfg.output.dir, "output");
    r.get(o, "vtk", cfg.output.vtk, "output");
    r.get(o, "field_csv", cfg.output.field_csv, "output");
    r.get(o, "snapshot_times", cfg.output.snapshot_times, "output");
  }
  if (doc.contains("sweep")) {
    const json& s = doc["sweep"];
    r.allow_keys(s,
                 {"amplitudes", "levels", "bisect_steps", "t_end", "seeds", "agreement_tol", "u_noise_floor",
                  "workers"},
                 "sweep");
    SweepConfig& sw = cfg.sweep;
    r.get(s, "amplitudes", sw.amplitudes, "sweep");
    r.get(s, "levels", sw.levels, "sweep");
    r.get(s, "bisect_steps", sw.bisect_steps, "sweep");
    r.get(s, "t_end", sw.t_end, "sweep");
    if (s.contains("seeds")) {
      std::vector<std::uint64_t> seeds;
      r.get(s, "seeds", seeds, "sweep");
      if (seeds.size() != 2) r.fail("expected two seeds", "sweep.seeds");
      sw.seed_a = seeds[0];
      sw.seed_b = seeds[1];
    }
    r.get(s, "agreement_tol", sw.agreement_tol, "sweep");
    r.get(s, "u_noise_floor", sw.u_noise_floor, "sweep");
    r.get(s, "workers", sw.workers, "sweep");
    if (sw.amplitudes.empty()) r.fail("needs at least one amplitude", "sweep.amplitudes");
    for (double a : sw.amplitudes)
      if (!(a > 0.0)) r.fail("amplitudes must be positive", "sweep.amplitudes");
    if (sw.levels.empty()) r.fail("needs at least one level", "sweep.levels");
    for (double l : sw.levels)
      if (!(l > 0.0)) r.fail("levels must be positive", "sweep.levels");
  }

  cfg.params.validate();
  const Grid grid(cfg.grid);
  build_boundary(cfg, grid);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open config file", 0, path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

json config_to_json(const ScenarioConfig& cfg) {
  json sides = json::object();
  for (Side s : kSides) {
    const SideConfig& sc = cfg.sides[static_cast<std::size_t>(s)];
    sides[kSideNames[static_cast<int>(s)]] = {
        {"gamma1", sc.gamma1}, {"gamma2", sc.gamma2}, {"w", sc.w}, {"mode", std::string(to_string(sc.mode))}};
  }
  json j{
      {"grid", {{"nx", cfg.grid.nx}, {"ny", cfg.grid.ny}, {"lx", cfg.grid.lx}, {"ly", cfg.grid.ly}}},
      {"params",
       {{"d1", cfg.params.d1}, {"d2", cfg.params.d2}, {"eps", cfg.params.eps}, {"nu", cfg.params.nu},
        {"kc", cfg.params.kc}}},
      {"boundary", sides},
      {"initial",
       {{"kind", init_name(cfg.initial.kind)},
        {"level", cfg.initial.level},
        {"seed", cfg.initial.seed},
        {"velocity_amplitude", cfg.initial.velocity_amplitude},
        {"linf_target", cfg.initial.linf_target}}},
      {"solver",
       {{"tol", cfg.solver.tol},
        {"elliptic_tol", cfg.solver.elliptic_tol},
        {"pb_tol", cfg.solver.pb_tol},
        {"dt_max", cfg.solver.dt_max},
        {"t_end", cfg.solver.t_end},
        {"t_cap", cfg.solver.t_cap},
        {"cadence", cfg.solver.cadence},
        {"normalize_residual", cfg.solver.normalize_residual},
        {"classify_tol", cfg.solver.classify_tol},
        {"noise_floor", cfg.solver.noise_floor},
        {"reference", reference_name(cfg.solver.reference)}}},
      {"output",
       {{"dir", cfg.output.dir},
        {"vtk", cfg.output.vtk},
        {"field_csv", cfg.output.field_csv},
        {"snapshot_times", cfg.output.snapshot_times}}},
      {"sweep",
       {{"amplitudes", cfg.sweep.amplitudes},
        {"levels", cfg.sweep.levels},
        {"bisect_steps", cfg.sweep.bisect_steps},
        {"t_end", cfg.sweep.t_end},
        {"seeds", {cfg.sweep.seed_a, cfg.sweep.seed_b}},
        {"agreement_tol", cfg.sweep.agreement_tol},
        {"u_noise_floor", cfg.sweep.u_noise_floor},
        {"workers", cfg.sweep.workers}}},
  };
  if (cfg.equilibrium.enabled) j["equilibrium"] = {{"mu1", cfg.equilibrium.mu1}, {"mu2", cfg.equilibrium.mu2}};
  return j;
}

BoundaryData build_boundary(const ScenarioConfig& cfg, const Grid& grid) {
  BoundaryData bd(grid);
  std::vector<std::string> violations;
  for (Side s : kSides) {
    const SideConfig& sc = cfg.sides[static_cast<std::size_t>(s)];
    const std::string prefix = std::string("boundary.") + kSideNames[static_cast<int>(s)] + ".";
    const Expression g1 = Expression::parse(sc.gamma1, prefix + "gamma1");
    const Expression g2 = Expression::parse(sc.gamma2, prefix + "gamma2");
    const Expression w = Expression::parse(sc.w, prefix + "w");
    SideData& side = bd.side(s);
    side.mode = sc.mode;
    const int n = grid.side_faces(s);
    side.gamma1.resize(static_cast<std::size_t>(n));
    side.gamma2.resize(static_cast<std::size_t>(n));
    side.w.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const BoundaryFace f = grid.boundary_face(s, k);
      const ExprVars v{f.s, f.x, f.y};
      const auto idx = static_cast<std::size_t>(k);
      side.w[idx] = w.eval(v);
      if (cfg.equilibrium.enabled) {
        side.gamma1[idx] = std::exp(cfg.equilibrium.mu1 - side.w[idx]);
        side.gamma2[idx] = std::exp(cfg.equilibrium.mu2 + side.w[idx]);
      } else {
        side.gamma1[idx] = g1.eval(v);
        side.gamma2[idx] = g2.eval(v);
      }
      auto check = [&](const char* name, double value, bool positive) {
        const std::string where = prefix + name + " = " + format_double(value) + " at s = " + format_double(f.s);
        if (!std::isfinite(value)) violations.push_back(where + " is not finite");
        else if (positive && !(value > 0.0)) violations.push_back(where + " violates positivity (gamma_i > 0)");
      };
      const bool dirichlet = sc.mode == BoundaryMode::Dirichlet;
      check("gamma1", side.gamma1[idx], dirichlet);
      check("gamma2", side.gamma2[idx], dirichlet);
      check("w", side.w[idx], false);
    }
  }
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return bd;
}

ScenarioConfig with_overrides(ScenarioConfig cfg, const CommandOptions& opts) {
  if (opts.resolution) {
    if (*opts.resolution < 4) throw InvalidSpec("--resolution must be at least 4");
    cfg.grid.nx = *opts.resolution;
    cfg.grid.ny = *opts.resolution;
  }
  if (opts.tol) {
    if (!(*opts.tol > 0.0)) throw InvalidSpec("--tol must be positive");
    cfg.solver.tol = *opts.tol;
  }
  if (opts.t_end) cfg.solver.t_end = *opts.t_end;
  if (opts.seed) cfg.initial.seed = *opts.seed;
  return cfg;
}

namespace {

struct Prepared {
  ScenarioConfig cfg;
  Grid grid;
  BoundaryData bd;
  std::filesystem::path out;
};

Prepared prepare(const ScenarioConfig& base, const CommandOptions& opts) {
  Prepared p;
  p.cfg = with_overrides(base, opts);
  p.cfg.params.validate();
  p.grid = Grid(p.cfg.grid);
  p.bd = build_boundary(p.cfg, p.grid);
  p.out = opts.out.empty() ? std::filesystem::path(p.cfg.output.dir) : opts.out;
  std::filesystem::create_directories(p.out);
  return p;
}

}  // namespace

SteadyOptions steady_options(const ScenarioConfig& cfg) {
  SteadyOptions o;
  o.tol = cfg.solver.tol;
  o.t_cap = cfg.solver.t_cap;
  o.step.dt_max = cfg.solver.dt_max;
  o.step.elliptic_tol = cfg.solver.elliptic_tol;
  o.normalize = cfg.solver.normalize_residual;
  return o;
}

namespace {

EquilibriumSpec equilibrium_spec(const ScenarioConfig& cfg, const BoundaryData& bd) {
  if (cfg.equilibrium.enabled) return {cfg.equilibrium.mu1, cfg.equilibrium.mu2, bd};
  const BoundaryClassification c = classify_boundary(bd, cfg.solver.classify_tol, cfg.solver.noise_floor);
  if (c.label != BoundaryLabel::Equilibrium)
    throw ValidationError({"boundary data are not in equilibrium (mu1 span " + format_double(c.mu1_span) +
                           ", mu2 span " + format_double(c.mu2_span) + "); add an equilibrium section"});
  const BoundaryTrace g1 = bd.gamma1_trace();
  const BoundaryTrace g2 = bd.gamma2_trace();
  const BoundaryTrace w = bd.w_trace();
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    m1 += std::log(g1[k]) + w[k];
    m2 += std::log(g2[k]) - w[k];
  }
  const auto n = static_cast<double>(w.size());
  return {m1 / n, m2 / n, bd};
}

json norms_json(const SteadyState& s) {
  return {{"linf_c1", linf_norm(s.c1)},
          {"linf_c2", linf_norm(s.c2)},
          {"linf_phi", linf_norm(s.phi)},
          {"l2_u", l2_norm_velocity(s.u)},
          {"linf_u", linf_norm_velocity(s.u)},
          {"min_c", std::min(min_value(s.c1), min_value(s.c2))},
          {"div_u", l2_norm(divergence(s.u))}};
}

json residual_json(const SteadyResidual& r) {
  return {{"np1", r.np1},           {"np2", r.np2},
          {"poisson", r.poisson},   {"momentum", r.momentum},
          {"divergence", r.divergence}, {"total", r.total()}};
}

void write_fields(const std::filesystem::path& dir, const std::string& stem, const State& s,
                  const OutputConfig& out) {
  if (out.vtk) write_vtk(dir / (stem + ".vtk"), s, stem);
  if (out.field_csv) {
    write_field_csv(dir / (stem + "_c1.csv"), s.c1);
    write_field_csv(dir / (stem + "_c2.csv"), s.c2);
    write_field_csv(dir / (stem + "_phi.csv"), s.phi);
    write_field_csv(dir / (stem + "_p.csv"), s.p);
  }
}

std::optional<json> classification_json(const ScenarioConfig& cfg, const BoundaryData& bd) {
  if (!bd.all_dirichlet()) return std::nullopt;
  return to_json(classify_boundary(bd, cfg.solver.classify_tol, cfg.solver.noise_floor));
}

json summary_head(const char* command, const Prepared& p) {
  json j{{"command", command}, {"config", config_to_json(p.cfg)}};
  if (auto c = classification_json(p.cfg, p.bd)) j["classification"] = *c;
  return j;
}

}  // namespace

json cmd_run(const ScenarioConfig& base, const CommandOptions& opts) {
  Prepared p = prepare(base, opts);
  const ScenarioConfig& cfg = p.cfg;

  std::optional<SteadyState> ref;
  switch (cfg.solver.reference) {
    case ReferenceKind::None: break;
    case ReferenceKind::PoissonBoltzmann:
      ref = solve_poisson_boltzmann(equilibrium_spec(cfg, p.bd), cfg.params, cfg.solver.pb_tol);
      break;
    case ReferenceKind::Steady: ref = solve_steady_nps(p.bd, cfg.params, nullptr, steady_options(cfg)); break;
  }

  State init;
  if (opts.restart) {
    init = load_checkpoint(*opts.restart);
    if (!(init.grid() == p.grid)) throw ValidationError({"checkpoint grid does not match the configured grid"});
  } else {
    init = make_initial_state(p.bd, cfg.params, cfg.initial, cfg.solver.elliptic_tol);
  }

  std::ofstream diag(p.out / "diagnostics.csv", std::ios::binary);
  if (!diag) throw Error("cannot open " + (p.out / "diagnostics.csv").string());
  write_diagnostics_header(diag);

  RunOptions ro;
  ro.t_end = cfg.solver.t_end;
  ro.cadence = cfg.solver.cadence;
  ro.step.dt_max = cfg.solver.dt_max;
  ro.step.elliptic_tol = cfg.solver.elliptic_tol;
  ro.snapshot_times = cfg.output.snapshot_times;
  ro.sink = [&](const DiagnosticsRecord& r) { write_diagnostics_row(diag, r); };
  ro.on_snapshot = [&](const State& s) { write_fields(p.out, "snapshot_t" + format_double(s.t), s, cfg.output); };

  RunResult result;
  try {
    result = run(init, p.bd, cfg.params, ref ? &*ref : nullptr, ro);
  } catch (const RunError& e) {
    diag.flush();
    save_checkpoint(p.out / "checkpoint_partial.json", e.partial.state);
    throw;
  }
  diag.close();

  write_fields(p.out, "final", result.state, cfg.output);
  save_checkpoint(p.out / "checkpoint.json", result.state);
  if (ref) write_energy_variants_csv(p.out / "energy_variants.csv", result.history);

  json j = summary_head("run", p);
  j["t_final"] = result.state.t;
  j["steps"] = result.state.steps;
  j["records"] = result.history.size();
  j["final"] = to_json(result.history.back());
  j["reference"] = reference_name(cfg.solver.reference);
  write_json(p.out / "summary.json", j);
  return j;
}

json cmd_steady(const ScenarioConfig& base, const CommandOptions& opts) {
  Prepared p = prepare(base, opts);
  std::optional<State> init;
  if (opts.restart) init = load_checkpoint(*opts.restart);
  SteadyState s;
  try {
    s = solve_steady_nps(p.bd, p.cfg.params, init ? &*init : nullptr, steady_options(p.cfg));
  } catch (const SteadyNotConverged& e) {
    write_fields(p.out, "steady_unconverged", e.best.as_state(), p.cfg.output);
    throw;
  }
  write_fields(p.out, "steady", s.as_state(), p.cfg.output);
  State as = s.as_state();
  as.t = s.t;
  as.steps = s.iterations;
  save_checkpoint(p.out / "checkpoint.json", as);

  json j = summary_head("steady", p);
  j["method"] = to_string(s.method);
  j["residual"] = s.residual;
  j["steps"] = s.iterations;
  j["t"] = s.t;
  j["norms"] = norms_json(s);
  j["steady_residual"] = residual_json(steady_residual_parts(s, p.bd, p.cfg.params));
  write_json(p.out / "summary.json", j);
  return j;
}

json cmd_pb(const ScenarioConfig& base, const CommandOptions& opts) {
  Prepared p = prepare(base, opts);
  const EquilibriumSpec spec = equilibrium_spec(p.cfg, p.bd);
  const SteadyState s = solve_poisson_boltzmann(spec, p.cfg.params, p.cfg.solver.pb_tol);
  write_fields(p.out, "pb", s.as_state(), p.cfg.output);

  json j = summary_head("pb", p);
  j["method"] = to_string(s.method);
  j["mu1"] = spec.mu1;
  j["mu2"] = spec.mu2;
  j["residual"] = s.residual;
  j["iterations"] = s.iterations;
  j["norms"] = norms_json(s);
  j["steady_residual"] = residual_json(steady_residual_parts(s, equilibrium_boundary(spec), p.cfg.params));
  write_json(p.out / "summary.json", j);
  return j;
}

json cmd_classify(const ScenarioConfig& base, const CommandOptions& opts) {
  Prepared p = prepare(base, opts);
  json j = summary_head("classify", p);
  if (!j.contains("classification")) throw ValidationError({"classify needs Dirichlet data on every side"});
  write_json(p.out / "summary.json", j);
  return j;
}

BoundaryData scale_boundary(const BoundaryData& base, double amplitude, double level) {
  const BoundaryTrace g1 = base.gamma1_trace();
  const BoundaryTrace g2 = base.gamma2_trace();
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < g1.size(); ++k) {
    m1 += g1[k];
    m2 += g2[k];
  }
  m1 /= static_cast<double>(g1.size());
  m2 /= static_cast<double>(g2.size());
  BoundaryData bd = base;
  for (Side s : kSides) {
    SideData& side = bd.side(s);
    for (double& v : side.w) v *= amplitude;
    for (double& v : side.gamma1) v = level + amplitude * (v - m1);
    for (double& v : side.gamma2) v = level + amplitude * (v - m2);
  }
  bd.validate();
  return bd;
}

SweepRow evaluate_amplitude(const ScenarioConfig& cfg, const BoundaryData& base, double level, double amplitude) {
  SweepRow row;
  row.level = level;
  row.amplitude = amplitude;
  try {
    const BoundaryData bd = scale_boundary(base, amplitude, level);
    const BoundaryClassification cls = classify_boundary(bd, cfg.solver.classify_tol, cfg.solver.noise_floor);
    row.smallness = cls.smallness;

    const SteadyState steady = solve_steady_nps(bd, cfg.params, nullptr, steady_options(cfg));
    row.u_star_linf = linf_norm_velocity(steady.u);

    RunOptions ro;
    ro.t_end = cfg.sweep.t_end;
    ro.cadence = cfg.solver.cadence;
    ro.step.dt_max = cfg.solver.dt_max;
    ro.step.elliptic_tol = cfg.solver.elliptic_tol;
    auto run_from = [&](std::uint64_t seed) {
      InitialCondition ic;
      ic.kind = InitKind::Random;
      ic.level = level;
      ic.seed = seed;
      return run(make_initial_state(bd, cfg.params, ic, cfg.solver.elliptic_tol), bd, cfg.params, &steady, ro);
    };
    const RunResult a = run_from(cfg.sweep.seed_a);
    const RunResult b = run_from(cfg.sweep.seed_b);

    const double tol = cfg.sweep.agreement_tol;
    row.converged = l2_norm(a.state.c1 - b.state.c1) <= tol && l2_norm(a.state.c2 - b.state.c2) <= tol &&
                    l2_norm(a.state.phi - b.state.phi) <= tol && l2_norm_velocity(a.state.u - b.state.u) <= tol;

    row.rate = std::numeric_limits<double>::infinity();
    row.rsq = 1.0;
    row.energy_monotone = true;
    bool decaying = true;
    for (const RunResult* r : {&a, &b}) {
      std::vector<std::pair<double, double>> series;
      for (const auto& rec : r->history) series.emplace_back(rec.t, rec.e_energy);
      const DecayFit fit = fit_decay_rate(series, 1.0);
      row.rate = std::min(row.rate, fit.rate);
      row.rsq = std::min(row.rsq, fit.rsq);
      decaying = decaying && fit.decaying;
      const auto t_alpha = asymptotic_linf_monitor(r->history, cls.a_gamma_sum, 0.05 * cls.a_gamma);
      row.energy_monotone = row.energy_monotone && t_alpha && energy_non_increasing(r->history, *t_alpha);
    }
    row.passed = row.converged && decaying && row.rate > 0.0 && row.u_star_linf > cfg.sweep.u_noise_floor;
  } catch (const std::exception& e) {
    row.error = e.what();
    row.passed = false;
  }
  return row;
}

SweepResult run_sweep(const ScenarioConfig& cfg) {
  const Grid grid(cfg.grid);
  const BoundaryData base = build_boundary(cfg, grid);
  if (!base.all_dirichlet()) throw ValidationError({"sweep needs Dirichlet data on every side"});

  std::vector<std::pair<double, double>> jobs;
  for (double level : cfg.sweep.levels)
    for (double a : cfg.sweep.amplitudes) jobs.emplace_back(level, a);

  auto evaluate_all = [&](const std::vector<std::pair<double, double>>& todo) {
    std::vector<SweepRow> rows(todo.size());
    unsigned workers = cfg.sweep.workers > 0 ? static_cast<unsigned>(cfg.sweep.workers)
                                             : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(todo.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t k = next++; k < todo.size(); k = next++)
        rows[k] = evaluate_amplitude(cfg, base, todo[k].first, todo[k].second);
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return rows;
  };

  SweepResult result;
  result.rows = evaluate_all(jobs);
  result.acceptance = true;
  for (double level : cfg.sweep.levels) {
    auto of_level = [&] {
      std::vector<const SweepRow*> v;
      for (const auto& r : result.rows)
        if (r.level == level) v.push_back(&r);
      std::sort(v.begin(), v.end(), [](auto* x, auto* y) { return x->amplitude < y->amplitude; });
      return v;
    };
    auto rows = of_level();
    result.acceptance = result.acceptance && rows.front()->passed;

    // Bracket between the largest passing amplitude below the first failure
    // and that failure, then bisect geometrically.
    double lo = std::numeric_limits<double>::quiet_NaN();
    double hi = std::numeric_limits<double>::quiet_NaN();
    for (const SweepRow* r : rows) {
      if (r->passed) {
        lo = r->amplitude;
      } else {
        hi = r->amplitude;
        break;
      }
    }
    if (!std::isnan(lo) && !std::isnan(hi)) {
      for (int k = 0; k < cfg.sweep.bisect_steps; ++k) {
        const double mid = std::sqrt(lo * hi);
        SweepRow r = evaluate_amplitude(cfg, base, level, mid);
        (r.passed ? lo : hi) = mid;
        result.rows.push_back(std::move(r));
      }
    }
    result.thresholds.emplace_back(level, lo);
  }
  std::sort(result.rows.begin(), result.rows.end(), [](const SweepRow& x, const SweepRow& y) {
    return x.level != y.level ? x.level < y.level : x.amplitude < y.amplitude;
  });
  return result;
}

json cmd_sweep(const ScenarioConfig& base, const CommandOptions& opts) {
  Prepared p = prepare(base, opts);
  const SweepResult result = run_sweep(p.cfg);

  std::ofstream os(p.out / "sweep.csv", std::ios::binary);
  if (!os) throw Error("cannot open " + (p.out / "sweep.csv").string());
  os << "level,amplitude,smallness,converged,rate,rsq,u_star_linf,energy_monotone,passed,error\n";
  for (const SweepRow& r : result.rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), '\n', ' ');
    std::replace(err.begin(), err.end(), '"', '\'');
    os << format_double(r.level) << ',' << format_double(r.amplitude) << ',' << format_double(r.smallness) << ','
       << (r.converged ? 1 : 0) << ',' << format_double(r.rate) << ',' << format_double(r.rsq) << ','
       << format_double(r.u_star_linf) << ',' << (r.energy_monotone ? 1 : 0) << ',' << (r.passed ? 1 : 0) << ",\""
       << err << "\"\n";
  }
  os.close();

  json j = summary_head("sweep", p);
  json th = json::array();
  for (const auto& [level, amp] : result.thresholds) {
    json t{{"level", level}};
    t["threshold"] = std::isnan(amp) ? json(nullptr) : json(amp);
    th.push_back(t);
  }
  j["thresholds"] = th;
  j["acceptance"] = result.acceptance;
  j["rows"] = result.rows.size();
  write_json(p.out / "summary.json", j);
  return j;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
      dynamic_cast<const InvalidSpec*>(&e))
    return 2;
  if (dynamic_cast<const NonConvergence*>(&e)) return 3;
  if (const auto* r = dynamic_cast<const RunError*>(&e)) return r->non_convergence ? 3 : 1;
  return 1;
}

}  // namespace nps
