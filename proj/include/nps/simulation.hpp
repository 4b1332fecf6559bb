#pragma once

// Coupled time loop: potential, ionic transport and Stokes flow advanced by
// first-order operator splitting, with diagnostics streamed at a fixed cadence.

#include <cstdint>
#include <functional>
#include <vector>

#include "nps/diagnostics.hpp"
#include "nps/elliptic.hpp"
#include "nps/errors.hpp"
#include "nps/state.hpp"

namespace nps {

struct StepOptions {
  double dt_max = 1e-2;
  double elliptic_tol = kDefaultEllipticTol;
};

/// One coupled step. Order: potential from the current charge (warm started),
/// dt = min(stable_dt, 0.8 viscous limit, dt_max), upwind + SG transport with
/// the lagged velocity, electric force from the pre-step fields, Stokes step,
/// and a final potential solve so the returned phi matches the new charge.
State step(const State& state, const BoundaryData& bd, const Params& params, const StepOptions& opts = {});

enum class InitKind { Laplace, Uniform, Random };

struct InitialCondition {
  InitKind kind = InitKind::Laplace;
  /// Uniform: c1 = c2 = level. Random: cellwise level * U(0.2, 1.8).
  double level = 1.0;
  std::uint64_t seed = 1;
  /// Random face velocities of this amplitude, projected to be divergence free.
  double velocity_amplitude = 0.0;
  /// When positive, each species is rescaled so its maximum equals this value.
  double linf_target = 0.0;
};

/// Builds c1, c2, u from the recipe and the matching potential. The Laplace
/// recipe extends each gamma_i harmonically and clips below at min(gamma_i) / 2.
State make_initial_state(const BoundaryData& bd, const Params& params, const InitialCondition& ic = {},
                         double elliptic_tol = kDefaultEllipticTol);

struct RunOptions {
  double t_end = 1.0;
  int cadence = 10;
  StepOptions step;
  std::int64_t max_steps = 0;  // 0 means unbounded
  std::vector<double> snapshot_times;
  std::function<void(const DiagnosticsRecord&)> sink;
  std::function<void(const State&)> on_snapshot;
};

struct RunResult {
  State state;
  std::vector<DiagnosticsRecord> history;
};

/// A run that failed mid-way; holds the history and state reached so far.
class RunError : public Error {
 public:
  RunError(const std::string& what, RunResult partial, bool non_convergence)
      : Error(what), partial(std::move(partial)), non_convergence(non_convergence) {}
  RunResult partial;
  bool non_convergence;
};

/// Steps from init to t_end. Records the initial state, every cadence steps and
/// the final state; energy columns are filled when ref is given. The last step
/// and steps preceding snapshot times are shortened to land on them exactly.
RunResult run(const State& init, const BoundaryData& bd, const Params& params, const SteadyState* ref,
              const RunOptions& opts);

}  // namespace nps
