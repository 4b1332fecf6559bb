#pragma once

#include "nps/elliptic.hpp"
#include "nps/grid.hpp"

namespace nps {

/// Logarithmic mean (a - b) / (ln a - ln b); zero when either argument is
/// non-positive and a when a == b.
double log_mean(double a, double b);

/// Face force -K rho_f (phi_right - phi_left) / h. The face charge is
/// rho_f = L(c1) - L(c2) with L the logarithmic mean, which makes the force
/// equal to K grad(c1 + c2) exactly whenever c1 ~ e^{-phi}, c2 ~ e^{phi}.
/// Wall-normal faces are zero.
VelocityField electric_force(const ScalarField& c1, const ScalarField& c2, const ScalarField& phi,
                             const Params& params);

/// Vector Laplacian of a MAC field with no-slip walls (ghost reflection of the
/// tangential component) or periodic wrap. Wall-normal faces are zero.
VelocityField viscous_laplacian(const VelocityField& u);

/// Explicit viscous limit 0.25 h^2 / nu with h = min(hx, hy).
double viscous_dt_limit(const Grid& grid, const Params& params);

struct StokesStepResult {
  VelocityField u;
  ScalarField p;  // zero mean
  EllipticSolveReport report;
};

/// u* = u + dt (nu Lap u + force), then projection onto discretely
/// divergence-free fields. Throws TimeStepTooLarge above viscous_dt_limit.
StokesStepResult stokes_step(const VelocityField& u, const VelocityField& force, const Params& params, double dt,
                             double tol = kDefaultEllipticTol);

struct SteadyStokesResult {
  VelocityField u;
  ScalarField p;
  double residual = 0.0;
  int steps = 0;
};

/// Pseudo-time iteration of stokes_step until ||u_{n+1} - u_n||_2 <= tol dt max(1, ||u||_2).
/// Throws NonConvergence after max_steps (0 selects a default cap).
SteadyStokesResult steady_stokes(const VelocityField& force, const Params& params, double tol,
                                 const VelocityField* initial = nullptr, int max_steps = 0);

}  // namespace nps
