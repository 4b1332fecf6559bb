#pragma once

// Config-driven experiments: JSON scenario documents, boundary expressions,
// and the run / steady / pb / classify / sweep commands behind the CLI.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nps/grid.hpp"
#include "nps/simulation.hpp"
#include "nps/steady.hpp"

namespace nps {

struct SideConfig {
  std::string gamma1 = "1";
  std::string gamma2 = "1";
  std::string w = "0";
  BoundaryMode mode = BoundaryMode::Dirichlet;
};

struct EquilibriumConfig {
  bool enabled = false;
  double mu1 = 0.0;
  double mu2 = 0.0;
};

enum class ReferenceKind { None, PoissonBoltzmann, Steady };

struct SolverConfig {
  double tol = 1e-7;  // steadiness residual
  double elliptic_tol = kDefaultEllipticTol;
  double pb_tol = 1e-10;
  double dt_max = 1e-2;
  double t_end = 1.0;
  double t_cap = 50.0;
  int cadence = 10;
  bool normalize_residual = false;
  double classify_tol = 1e-10;
  double noise_floor = 0.0;
  ReferenceKind reference = ReferenceKind::None;
};

struct OutputConfig {
  std::string dir = "out";
  bool vtk = true;
  bool field_csv = true;
  std::vector<double> snapshot_times;
};

struct SweepConfig {
  std::vector<double> amplitudes{0.01, 0.1, 1.0};
  std::vector<double> levels{1.0};
  int bisect_steps = 3;
  double t_end = 2.0;
  std::uint64_t seed_a = 1;
  std::uint64_t seed_b = 2;
  double agreement_tol = 1e-6;
  double u_noise_floor = 1e-9;
  int workers = 0;  // 0 selects the hardware concurrency
};

struct ScenarioConfig {
  GridSpec grid;
  Params params;
  std::array<SideConfig, 4> sides;  // indexed by Side
  EquilibriumConfig equilibrium;
  InitialCondition initial;
  SolverConfig solver;
  OutputConfig output;
  SweepConfig sweep;
};

/// Parses a JSON scenario. Unknown keys are rejected; every omitted key keeps
/// its default. Throws ParseError with line and field context, or
/// ValidationError listing every invalid boundary sample.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// The configuration echoed back as a JSON document.
nlohmann::json config_to_json(const ScenarioConfig& cfg);

/// Samples the side expressions at the boundary faces. With the equilibrium
/// section enabled, gamma_i are replaced by e^{mu1 - W} and e^{mu2 + W}.
/// Throws ValidationError listing every violation.
BoundaryData build_boundary(const ScenarioConfig& cfg, const Grid& grid);

struct CommandOptions {
  std::filesystem::path out;  // empty: use the config's output.dir
  std::optional<int> resolution;
  std::optional<double> tol;
  std::optional<double> t_end;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> restart;
};

/// Applies resolution (nx = ny = N), tol, t_end and seed overrides.
/// Pseudo-time options taken from the solver section.
SteadyOptions steady_options(const ScenarioConfig& cfg);

ScenarioConfig with_overrides(ScenarioConfig cfg, const CommandOptions& opts);

/// Each command writes its files under the output directory and returns the
/// summary document it also writes as summary.json.
nlohmann::json cmd_run(const ScenarioConfig& cfg, const CommandOptions& opts = {});
nlohmann::json cmd_steady(const ScenarioConfig& cfg, const CommandOptions& opts = {});
nlohmann::json cmd_pb(const ScenarioConfig& cfg, const CommandOptions& opts = {});
nlohmann::json cmd_classify(const ScenarioConfig& cfg, const CommandOptions& opts = {});

struct SweepRow {
  double level = 1.0;
  double amplitude = 0.0;
  double smallness = 0.0;
  bool converged = false;
  double rate = 0.0;
  double rsq = 0.0;
  double u_star_linf = 0.0;
  bool energy_monotone = false;
  bool passed = false;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (level, amplitude)
  /// Largest passing amplitude per level, NaN when none passed.
  std::vector<std::pair<double, double>> thresholds;
  bool acceptance = false;  // the smallest amplitude of every level passed
};

/// Boundary data scaled about a fixed mean level: W -> s W and
/// gamma_i -> level + s (gamma_i - mean(gamma_i)).
BoundaryData scale_boundary(const BoundaryData& base, double amplitude, double level);

/// Evaluates one amplitude: steady reference, two randomized runs, decay fits.
SweepRow evaluate_amplitude(const ScenarioConfig& cfg, const BoundaryData& base, double level, double amplitude);

SweepResult run_sweep(const ScenarioConfig& cfg);
nlohmann::json cmd_sweep(const ScenarioConfig& cfg, const CommandOptions& opts = {});

/// Process exit code for an exception escaping a command: 2 validation or
/// parse errors, 3 non-convergence, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace nps
