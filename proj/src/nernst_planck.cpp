#include "nps/nernst_planck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nps/errors.hpp"

namespace nps {

IonSpec ion_spec(const Params& params, Species species) {
  return species == Species::Cation ? IonSpec{params.d1, +1} : IonSpec{params.d2, -1};
}

double bernoulli(double x) {
  if (std::abs(x) < 1e-5) return 1.0 - 0.5 * x + x * x / 12.0;
  return x / std::expm1(x);
}

double sg_edge_flux(double c_left, double c_right, double dphi, double d, double h, int z) {
  // B(-x) = e^x B(x). Factoring out the smaller Bernoulli weight leaves one
  // fused difference that cancels to a few ulps on Boltzmann profiles and
  // never overflows.
  const double x = z * dphi;
  if (x >= 0.0) return (d / h) * bernoulli(-x) * std::fma(std::exp(-x), c_left, -c_right);
  return (d / h) * bernoulli(x) * std::fma(-std::exp(x), c_right, c_left);
}

namespace {

const std::vector<double>& gamma_of(const SideData& side, Species species) {
  return species == Species::Cation ? side.gamma1 : side.gamma2;
}

}  // namespace

VelocityField sg_face_fluxes(const ScalarField& c, const ScalarField& phi, const BoundaryData& bd,
                             Species species, const Params& params) {
  const Grid& g = c.grid();
  if (g.periodic()) throw InvalidSpec("ionic transport needs a walled grid");
  const int nx = g.nx();
  const int ny = g.ny();
  const IonSpec ion = ion_spec(params, species);
  const double d = ion.diffusivity;
  const int z = ion.valence;
  VelocityField f(g);

  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i)
      f.ux(i, j) = sg_edge_flux(c(i - 1, j), c(i, j), phi(i, j) - phi(i - 1, j), d, g.hx(), z);
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      f.uy(i, j) = sg_edge_flux(c(i, j - 1), c(i, j), phi(i, j) - phi(i, j - 1), d, g.hy(), z);

  // Wall faces: flux between the cell center and the boundary point, h/2 away.
  const auto& left = bd.side(Side::Left);
  const auto& right = bd.side(Side::Right);
  const auto& bottom = bd.side(Side::Bottom);
  const auto& top = bd.side(Side::Top);
  const double hx2 = 0.5 * g.hx();
  const double hy2 = 0.5 * g.hy();
  for (int j = 0; j < ny; ++j) {
    const auto k = static_cast<std::size_t>(j);
    if (left.mode == BoundaryMode::Dirichlet)
      f.ux(0, j) = sg_edge_flux(gamma_of(left, species)[k], c(0, j), phi(0, j) - left.w[k], d, hx2, z);
    if (right.mode == BoundaryMode::Dirichlet)
      f.ux(nx, j) =
          sg_edge_flux(c(nx - 1, j), gamma_of(right, species)[k], right.w[k] - phi(nx - 1, j), d, hx2, z);
  }
  for (int i = 0; i < nx; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (bottom.mode == BoundaryMode::Dirichlet)
      f.uy(i, 0) = sg_edge_flux(gamma_of(bottom, species)[k], c(i, 0), phi(i, 0) - bottom.w[k], d, hy2, z);
    if (top.mode == BoundaryMode::Dirichlet)
      f.uy(i, ny) = sg_edge_flux(c(i, ny - 1), gamma_of(top, species)[k], top.w[k] - phi(i, ny - 1), d, hy2, z);
  }
  return f;
}

ScalarField drift_diffusion_rate(const ScalarField& c, const ScalarField& phi, const BoundaryData& bd,
                                 Species species, const Params& params) {
  const VelocityField flux = sg_face_fluxes(c, phi, bd, species, params);
  const Grid& g = c.grid();
  ScalarField rate(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      rate(i, j) = -(flux.ux(i + 1, j) - flux.ux(i, j)) / g.hx() - (flux.uy(i, j + 1) - flux.uy(i, j)) / g.hy();
  return rate;
}

ScalarField advection_rate(const ScalarField& c, const VelocityField& u) {
  const Grid& g = c.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  ScalarField rate(g);
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      const double v = u.ux(i, j);
      const double flux = v * (v > 0.0 ? c(i - 1, j) : c(i, j)) / g.hx();
      rate(i - 1, j) -= flux;
      rate(i, j) += flux;
    }
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double v = u.uy(i, j);
      const double flux = v * (v > 0.0 ? c(i, j - 1) : c(i, j)) / g.hy();
      rate(i, j - 1) -= flux;
      rate(i, j) += flux;
    }
  return rate;
}

double max_potential_jump(const ScalarField& phi, const BoundaryData& bd) {
  const Grid& g = phi.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  double m = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) m = std::max(m, std::abs(phi(i, j) - phi(i - 1, j)));
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) m = std::max(m, std::abs(phi(i, j) - phi(i, j - 1)));
  for (int j = 0; j < ny; ++j) {
    const auto k = static_cast<std::size_t>(j);
    m = std::max(m, std::abs(bd.side(Side::Left).w[k] - phi(0, j)));
    m = std::max(m, std::abs(bd.side(Side::Right).w[k] - phi(nx - 1, j)));
  }
  for (int i = 0; i < nx; ++i) {
    const auto k = static_cast<std::size_t>(i);
    m = std::max(m, std::abs(bd.side(Side::Bottom).w[k] - phi(i, 0)));
    m = std::max(m, std::abs(bd.side(Side::Top).w[k] - phi(i, ny - 1)));
  }
  return m;
}

double stable_dt(const State& state, const ScalarField& phi, const VelocityField& u, const BoundaryData& bd,
                 const Params& params, double dt_max) {
  (void)state;
  const Grid& g = phi.grid();
  double max_ux = 0.0;
  double max_uy = 0.0;
  for (double v : u.ux_values()) max_ux = std::max(max_ux, std::abs(v));
  for (double v : u.uy_values()) max_uy = std::max(max_uy, std::abs(v));
  double dt = dt_max;
  if (max_ux > 0.0) dt = std::min(dt, 0.5 * g.hx() / max_ux);
  if (max_uy > 0.0) dt = std::min(dt, 0.5 * g.hy() / max_uy);
  const double h = g.h_min();
  const double d = std::max(params.d1, params.d2);
  dt = std::min(dt, 0.5 * h * h / (4.0 * d * (1.0 + max_potential_jump(phi, bd))));
  return dt;
}

Concentrations np_step(const State& state, const ScalarField& phi, const VelocityField& u, const BoundaryData& bd,
                       const Params& params, double dt) {
  if (!(dt > 0.0)) throw InvalidSpec("np_step needs dt > 0");
  const double bound = stable_dt(state, phi, u, bd, params, std::numeric_limits<double>::infinity());
  if (dt > bound * (1.0 + 1e-12)) throw TimeStepTooLarge(dt, bound);

  auto advance = [&](const ScalarField& c, Species species) {
    ScalarField next = c;
    next += dt * advection_rate(c, u);
    ScalarField dd = drift_diffusion_rate(next, phi, bd, species, params);
    next += dt * dd;
    return next;
  };
  return {advance(state.c1, Species::Cation), advance(state.c2, Species::Anion)};
}

}  // namespace nps
