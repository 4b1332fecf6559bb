#include "nps/stokes.hpp"

#include <algorithm>
#include <cmath>

#include "nps/errors.hpp"

namespace nps {

double log_mean(double a, double b) {
  if (a <= 0.0 || b <= 0.0) return 0.0;
  const double x = b / a - 1.0;
  if (std::abs(x) < 1e-4) {
    // x / log1p(x) = 1 + x/2 - x^2/12 + x^3/24 + O(x^4)
    return a * (1.0 + x * (0.5 + x * (-1.0 / 12.0 + x / 24.0)));
  }
  return (b - a) / std::log(b / a);
}

VelocityField electric_force(const ScalarField& c1, const ScalarField& c2, const ScalarField& phi,
                             const Params& params) {
  const Grid& g = phi.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  const double k = params.kc;
  VelocityField f(g);
  auto face = [&](int ia, int ja, int ib, int jb, double h) {
    const double rho = log_mean(c1(ia, ja), c1(ib, jb)) - log_mean(c2(ia, ja), c2(ib, jb));
    return -k * rho * (phi(ib, jb) - phi(ia, ja)) / h;
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) f.ux(i, j) = face(i - 1, j, i, j, g.hx());
    if (g.periodic()) f.ux(0, j) = face(nx - 1, j, 0, j, g.hx());
  }
  for (int i = 0; i < nx; ++i) {
    for (int j = 1; j < ny; ++j) f.uy(i, j) = face(i, j - 1, i, j, g.hy());
    if (g.periodic()) f.uy(i, 0) = face(i, ny - 1, i, 0, g.hy());
  }
  f.apply_boundary();
  return f;
}

VelocityField viscous_laplacian(const VelocityField& u) {
  const Grid& g = u.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  const bool periodic = g.periodic();
  const double ix = 1.0 / (g.hx() * g.hx());
  const double iy = 1.0 / (g.hy() * g.hy());
  VelocityField out(g);

  // ux: unknown faces are 1..nx-1 with walls, 0..nx-1 when periodic.
  for (int j = 0; j < ny; ++j) {
    for (int i = periodic ? 0 : 1; i < nx; ++i) {
      const double c = u.ux(i, j);
      const double w = i > 0 ? u.ux(i - 1, j) : u.ux(nx - 1, j);
      const double e = u.ux(i + 1, j);
      const double s = j > 0 ? u.ux(i, j - 1) : (periodic ? u.ux(i, ny - 1) : -c);
      const double n = j < ny - 1 ? u.ux(i, j + 1) : (periodic ? u.ux(i, 0) : -c);
      out.ux(i, j) = ix * (w - 2.0 * c + e) + iy * (s - 2.0 * c + n);
    }
  }
  for (int j = periodic ? 0 : 1; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double c = u.uy(i, j);
      const double s = j > 0 ? u.uy(i, j - 1) : u.uy(i, ny - 1);
      const double n = u.uy(i, j + 1);
      const double w = i > 0 ? u.uy(i - 1, j) : (periodic ? u.uy(nx - 1, j) : -c);
      const double e = i < nx - 1 ? u.uy(i + 1, j) : (periodic ? u.uy(0, j) : -c);
      out.uy(i, j) = ix * (w - 2.0 * c + e) + iy * (s - 2.0 * c + n);
    }
  }
  out.apply_boundary();
  return out;
}

double viscous_dt_limit(const Grid& grid, const Params& params) {
  const double h = grid.h_min();
  return 0.25 * h * h / params.nu;
}

StokesStepResult stokes_step(const VelocityField& u, const VelocityField& force, const Params& params, double dt,
                             double tol) {
  if (!(dt > 0.0)) throw InvalidSpec("stokes_step needs dt > 0");
  const double bound = viscous_dt_limit(u.grid(), params);
  if (dt > bound * (1.0 + 1e-12)) throw TimeStepTooLarge(dt, bound);

  VelocityField u_star = viscous_laplacian(u);
  u_star *= params.nu;
  u_star += force;
  u_star *= dt;
  u_star += u;
  u_star.apply_boundary();
  ProjectionResult proj = solve_pressure_projection(u_star, dt, tol);
  return {std::move(proj.u), std::move(proj.phi), proj.report};
}

SteadyStokesResult steady_stokes(const VelocityField& force, const Params& params, double tol,
                                 const VelocityField* initial, int max_steps) {
  if (!(tol > 0.0)) throw InvalidSpec("steady_stokes needs tol > 0");
  const Grid& g = force.grid();
  // Strictly inside the explicit limit so checkerboard modes still decay.
  const double dt = 0.8 * viscous_dt_limit(g, params);
  if (max_steps <= 0) max_steps = 1'000'000;
  const double proj_tol = std::min(kDefaultEllipticTol, std::max(1e-13, 0.1 * tol * dt));

  SteadyStokesResult out;
  out.u = initial ? *initial : VelocityField(g);
  out.u.apply_boundary();
  out.p = ScalarField(g);
  for (int n = 0; n < max_steps; ++n) {
    StokesStepResult next = stokes_step(out.u, force, params, dt, proj_tol);
    VelocityField change = next.u - out.u;
    out.u = std::move(next.u);
    out.p = std::move(next.p);
    out.steps = n + 1;
    out.residual = l2_norm_velocity(change) / (dt * std::max(1.0, l2_norm_velocity(out.u)));
    if (out.residual <= tol) return out;
  }
  throw NonConvergence("steady Stokes iteration stalled at residual " + std::to_string(out.residual));
}

}  // namespace nps
