#pragma once

// Steady states: the equilibrium Poisson-Boltzmann state by Newton's method,
// the general steady state by pseudo-time continuation of the coupled
// stepper, and an independently assembled steady residual.

#include <limits>

#include "nps/elliptic.hpp"
#include "nps/errors.hpp"
#include "nps/simulation.hpp"
#include "nps/state.hpp"

namespace nps {

struct EquilibriumSpec {
  double mu1 = 0.0;
  double mu2 = 0.0;
  /// Only the potential traces are read.
  BoundaryData w;
};

/// Dirichlet boundary data gamma1 = e^{mu1 - W}, gamma2 = e^{mu2 + W}.
BoundaryData equilibrium_boundary(const EquilibriumSpec& spec);

/// Newton iteration on F(phi) = -eps Lap_h phi - e^{mu1 - phi} + e^{mu2 + phi}
/// with phi = W on the boundary. Each step solves the SPD Jacobian by CG, with
/// step halving until ||F|| decreases. The pressure balances the electric
/// force exactly: p = K (c1 + c2) minus its mean, u = 0. Throws NonConvergence
/// after 50 iterations.
SteadyState solve_poisson_boltzmann(const EquilibriumSpec& spec, const Params& params, double tol = 1e-10);

struct SteadyOptions {
  double tol = 1e-7;
  double t_cap = 50.0;
  StepOptions step;
  /// Divide the steadiness residual by ||c1||_2 + ||c2||_2.
  bool normalize = false;
};

/// Pseudo-time solve that stopped at t_cap; best holds the last state reached.
class SteadyNotConverged : public NonConvergence {
 public:
  SteadyNotConverged(const std::string& what, SteadyState best) : NonConvergence(what), best(std::move(best)) {}
  SteadyState best;
};

/// Steps the coupled system from init (default: make_initial_state with the
/// Laplace recipe) until
///   r_s = (||dc1||_2 + ||dc2||_2 + ||du||_2) / dt < tol.
/// The pressure is then taken from steady_stokes at the converged force.
SteadyState solve_steady_nps(const BoundaryData& bd, const Params& params, const State* init = nullptr,
                             const SteadyOptions& opts = {});

struct SteadyResidual {
  double np1 = 0.0;
  double np2 = 0.0;
  double poisson = 0.0;
  double momentum = 0.0;
  double divergence = 0.0;
  double total() const { return np1 + np2 + poisson + momentum + divergence; }
};

/// Discrete steady operator evaluated on s with its own face loops: transport
/// balance div(u c_i + J_i) per species, -eps Lap phi - rho, the momentum
/// balance -nu Lap u + grad p - f on interior faces, and div u. L2 norms.
SteadyResidual steady_residual_parts(const SteadyState& s, const BoundaryData& bd, const Params& params);

/// Sum of the parts above.
double steady_residual(const SteadyState& s, const BoundaryData& bd, const Params& params);

}  // namespace nps
