#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nps/errors.hpp"
#include "nps/expression.hpp"
#include "nps/scenario.hpp"
#include "support.hpp"

using namespace nps;
using nps::testing::kPi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("nps_scenario_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kFlowConfig = R"J({
  "grid": {"nx": 12, "ny": 12},
  "boundary": {
    "default": {"gamma1": "1", "gamma2": "1", "w": "0.3"},
    "bottom": {"gamma1": "1 + 0.15*sin(2*pi*s)", "gamma2": "1 - 0.15*sin(2*pi*s)", "w": "0.3*cos(2*pi*s)"}
  },
  "initial": {"kind": "random", "seed": 4},
  "solver": {"t_end": 0.02, "cadence": 5, "tol": 1e-8},
  "output": {"vtk": true, "field_csv": true, "snapshot_times": [0.01]}
})J";

}  // namespace

TEST_CASE("default configuration") {
  ScenarioConfig cfg = parse_config("{}");
  CHECK(cfg.grid == GridSpec{});
  CHECK(cfg.params.eps == Params{}.eps);
  CHECK(cfg.solver.tol == 1e-7);
  CHECK(cfg.solver.cadence == 10);
  CHECK(cfg.output.dir == "out");
  CHECK(cfg.sweep.amplitudes == std::vector<double>{0.01, 0.1, 1.0});
  CHECK(cfg.sides[0].gamma1 == "1");
  CHECK_FALSE(cfg.equilibrium.enabled);
  // The echo parses back to the same configuration.
  ScenarioConfig again = parse_config(config_to_json(cfg).dump());
  CHECK(config_to_json(again) == config_to_json(cfg));
}

TEST_CASE("boundary samples follow the side expressions") {
  ScenarioConfig cfg = parse_config(R"J({"grid": {"nx": 16, "ny": 8, "lx": 2},
    "boundary": {"left": {"w": "0.1*sin(2*pi*s)"}, "top": {"gamma1": "2 + x*y", "w": "exp(-s)"}}})J");
  Grid g(cfg.grid);
  BoundaryData bd = build_boundary(cfg, g);
  for (int k = 0; k < g.side_faces(Side::Left); ++k) {
    const auto f = g.boundary_face(Side::Left, k);
    CHECK(std::abs(bd.side(Side::Left).w[static_cast<std::size_t>(k)] - 0.1 * std::sin(2 * kPi * f.s)) <= 1e-12);
    CHECK(f.s == doctest::Approx(1.0 - f.y));
  }
  for (int k = 0; k < g.side_faces(Side::Top); ++k) {
    const auto f = g.boundary_face(Side::Top, k);
    CHECK(std::abs(bd.side(Side::Top).gamma1[static_cast<std::size_t>(k)] - (2 + f.x * f.y)) <= 1e-12);
    CHECK(std::abs(bd.side(Side::Top).w[static_cast<std::size_t>(k)] - std::exp(-f.s)) <= 1e-12);
  }
  CHECK(bd.side(Side::Bottom).w[0] == 0.0);
}

TEST_CASE("validation errors name positivity and every sample") {
  try {
    parse_config(R"J({"grid": {"nx": 4, "ny": 4}, "boundary": {"right": {"gamma1": "-1"}}})J");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.violations.size() == 4);
    CHECK(e.violations[0].find("boundary.right.gamma1") != std::string::npos);
    CHECK(e.violations[0].find("positivity") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(R"J({"boundary": {"top": {"gamma2": "x - 0.5"}}})J"), ValidationError);
  // Blocking sides carry no concentration data.
  CHECK_NOTHROW(parse_config(R"J({"boundary": {"top": {"gamma2": "-1", "mode": "blocking"}}})J"));
  CHECK_THROWS_AS(parse_config(R"J({"params": {"eps": 0}})J"), InvalidSpec);
  CHECK_THROWS_AS(parse_config(R"J({"grid": {"nx": 2}})J"), InvalidSpec);
}

TEST_CASE("parse errors carry line and field") {
  try {
    parse_config("{\n  \"grid\": {\"nx\": 8},\n  \"boundary\": {\n    \"top\": {\"w\": \"sin(2*pi*s\"}\n  }\n}");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 4);
    CHECK(e.field == "boundary.top.w");
  }
  try {
    parse_config("{\n  \"solver\": {\n    \"tolerance\": 1\n  }\n}");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
    CHECK(e.field == "solver.tolerance");
  }
  try {
    parse_config("{\n \"grid\": {\"nx\": \"eight\"}\n}");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.field == "grid.nx");
  }
  CHECK_THROWS_AS(parse_config("{ \"grid\": "), ParseError);
}

TEST_CASE("expression grammar") {
  auto ev = [](const char* text, double s = 0.3, double x = 0.2, double y = 0.7) {
    return Expression::parse(text).eval({s, x, y});
  };
  CHECK(ev("1 + 2 * 3") == 7.0);
  CHECK(ev("(1 + 2) * 3") == 9.0);
  CHECK(ev("2 ^ 3 ^ 2") == 512.0);
  CHECK(ev("-2 ^ 2") == -4.0);
  CHECK(ev("2 ^ -1") == 0.5);
  CHECK(ev("8 / 4 / 2") == 1.0);
  CHECK(ev("10 - 4 - 3") == 3.0);
  CHECK(ev("+s") == 0.3);
  CHECK(ev("x * y") == doctest::Approx(0.14));
  CHECK(ev("pi") == kPi);
  CHECK(ev("e") == std::exp(1.0));
  CHECK(ev("1.5e-3") == 1.5e-3);
  CHECK(ev("sqrt(abs(-16)) + log(exp(2)) + tanh(0) + tan(0) + cos(0)") == doctest::Approx(7.0));
  CHECK(ev("0.1*sin(2*pi*s)", 0.25) == doctest::Approx(0.1));
  CHECK(Expression::constant(2.5).eval({}) == 2.5);
  for (const char* bad : {"", "1 +", "sin 2", "foo(1)", "z", "(1", "1)", "2 ** 3", "3 $"})
    CHECK_THROWS_AS(Expression::parse(bad, "f", 1), ParseError);
  try {
    Expression::parse("1 + bar", "boundary.top.w", 9);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("column 5") != std::string::npos);
    CHECK(e.line == 9);
  }
}

TEST_CASE("overrides") {
  ScenarioConfig cfg = parse_config("{}");
  CommandOptions o;
  o.resolution = 20;
  o.tol = 1e-5;
  o.t_end = 3.0;
  o.seed = 77;
  ScenarioConfig c = with_overrides(cfg, o);
  CHECK(c.grid.nx == 20);
  CHECK(c.grid.ny == 20);
  CHECK(c.solver.tol == 1e-5);
  CHECK(c.solver.t_end == 3.0);
  CHECK(c.initial.seed == 77);
  o.resolution = 2;
  CHECK_THROWS_AS(with_overrides(cfg, o), InvalidSpec);
}

TEST_CASE("commands write their outputs and are deterministic") {
  ScenarioConfig cfg = parse_config(kFlowConfig);
  fs::path a = scratch("run_a"), b = scratch("run_b");
  CommandOptions oa;
  oa.out = a;
  CommandOptions ob;
  ob.out = b;
  auto ja = cmd_run(cfg, oa);
  auto jb = cmd_run(cfg, ob);
  CHECK(ja.dump() == jb.dump());
  for (const char* f : {"diagnostics.csv", "final_c1.csv", "final.vtk", "checkpoint.json", "summary.json",
                        "snapshot_t0.01.vtk"}) {
    CHECK(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const std::string diag = slurp(a / "diagnostics.csv");
  CHECK(diag.rfind("t,e_energy,l2_c1,l2_c2,l2_u,linf_c1,linf_c2,min_c,div_u,mass_c1,mass_c2\n", 0) == 0);
  CHECK(ja["t_final"] == 0.02);

  // Restart from the checkpoint continues the run.
  CommandOptions more;
  more.out = scratch("run_c");
  more.restart = a / "checkpoint.json";
  more.t_end = 0.03;
  auto jc = cmd_run(cfg, more);
  CHECK(jc["t_final"] == 0.03);
  CHECK(jc["steps"].get<long>() > ja["steps"].get<long>());

  auto cls = cmd_classify(cfg, oa);
  CHECK(cls["classification"]["label"] == "NonequilibriumNonzeroFlow");

  ScenarioConfig eq = parse_config(R"J({"grid": {"nx": 12, "ny": 12},
    "boundary": {"default": {"gamma1": "exp(-0.2*sin(pi*s))", "gamma2": "exp(0.2*sin(pi*s))", "w": "0.2*sin(pi*s)"}},
    "solver": {"tol": 1e-9}})J");
  CHECK(cmd_classify(eq, oa)["classification"]["label"] == "Equilibrium");
  auto pb = cmd_pb(eq, oa);
  auto st = cmd_steady(eq, oa);
  CHECK(std::abs(pb["mu1"].get<double>()) <= 1e-14);
  CHECK(std::abs(pb["norms"]["linf_phi"].get<double>() - st["norms"]["linf_phi"].get<double>()) <= 1e-6);
  CHECK(st["norms"]["l2_u"].get<double>() <= 1e-8);
  CHECK_THROWS_AS(cmd_pb(cfg, oa), ValidationError);

  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(more.out);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ValidationError({"x"})) == 2);
  CHECK(exit_code_for(ParseError("x")) == 2);
  CHECK(exit_code_for(InvalidSpec("x")) == 2);
  CHECK(exit_code_for(NonConvergence("x")) == 3);
  CHECK(exit_code_for(RunError("x", {}, true)) == 3);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("sweep on a coarse grid") {
  ScenarioConfig cfg = parse_config(R"J({"grid": {"nx": 8, "ny": 8},
    "boundary": {"default": {"gamma1": "1", "gamma2": "1", "w": "1"},
                 "bottom": {"gamma1": "1 + 0.5*sin(2*pi*s)", "gamma2": "1 - 0.5*sin(2*pi*s)", "w": "cos(2*pi*s)"}},
    "solver": {"tol": 1e-10},
    "sweep": {"amplitudes": [0.02, 0.2], "bisect_steps": 1, "t_end": 1.5, "workers": 2}})J");
  SweepResult r = run_sweep(cfg);
  REQUIRE(r.rows.size() >= 2);
  for (std::size_t k = 1; k < r.rows.size(); ++k) CHECK(r.rows[k - 1].amplitude < r.rows[k].amplitude);
  const SweepRow& small = r.rows.front();
  MESSAGE("small amplitude row: rate " << small.rate << " rsq " << small.rsq << " u* " << small.u_star_linf
                                       << " error '" << small.error << "'");
  CHECK(small.passed);
  CHECK(small.rate > 0.0);
  CHECK(r.acceptance);
  REQUIRE(r.thresholds.size() == 1);
  CHECK(r.thresholds[0].second >= 0.02);

  ScenarioConfig again = cfg;
  again.sweep.workers = 1;
  SweepResult r1 = run_sweep(again);
  REQUIRE(r1.rows.size() == r.rows.size());
  for (std::size_t k = 0; k < r.rows.size(); ++k) CHECK(r1.rows[k].rate == r.rows[k].rate);
}

TEST_CASE("command line interface") {
  const char* cli = std::getenv("NPS_CLI");
  if (!cli) {
    MESSAGE("NPS_CLI not set; skipping CLI checks");
    return;
  }
  fs::path dir = scratch("cli");
  std::ofstream(dir / "flow.json") << kFlowConfig;
  std::ofstream(dir / "bad.json") << R"J({"boundary": {"left": {"gamma2": "0"}}})J";
  std::ofstream(dir / "typo.json") << "{\n \"grdi\": {}\n}";
  std::ofstream(dir / "short.json") << R"J({"grid": {"nx": 8, "ny": 8},
    "boundary": {"bottom": {"gamma1": "1 + 0.5*sin(pi*s)", "w": "sin(pi*s)"}}, "solver": {"t_cap": 0.001}})J";
  auto sh = [&](const std::string& args) {
    const std::string cmd = std::string(cli) + " " + args + " > " + (dir / "stdout.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };
  const std::string flow = (dir / "flow.json").string();
  CHECK(sh("run --config " + flow + " --out " + (dir / "r1").string()) == 0);
  CHECK(sh("run --config " + flow + " --out " + (dir / "r2").string()) == 0);
  CHECK(slurp(dir / "r1" / "diagnostics.csv") == slurp(dir / "r2" / "diagnostics.csv"));
  CHECK(slurp(dir / "r1" / "final_phi.csv") == slurp(dir / "r2" / "final_phi.csv"));
  CHECK(sh("classify --config " + flow + " --out " + (dir / "c").string()) == 0);
  CHECK(slurp(dir / "stdout.txt").find("NonequilibriumNonzeroFlow") != std::string::npos);
  CHECK(sh("run --config " + (dir / "bad.json").string() + " --out " + (dir / "b").string()) == 2);
  CHECK(slurp(dir / "stdout.txt").find("positivity") != std::string::npos);
  CHECK(sh("classify --config " + (dir / "typo.json").string() + " --out " + (dir / "t").string()) == 2);
  CHECK(sh("steady --config " + (dir / "short.json").string() + " --out " + (dir / "s").string()) == 3);
  CHECK(sh("frobnicate") != 0);
  fs::remove_all(dir);
}
