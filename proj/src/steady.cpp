#include "nps/steady.hpp"

#include <cmath>

#include "nps/stokes.hpp"

namespace nps {

BoundaryData equilibrium_boundary(const EquilibriumSpec& spec) {
  BoundaryData bd = spec.w;
  for (Side s : kSides) {
    SideData& side = bd.side(s);
    side.mode = BoundaryMode::Dirichlet;
    side.gamma1.resize(side.w.size());
    side.gamma2.resize(side.w.size());
    for (std::size_t k = 0; k < side.w.size(); ++k) {
      side.gamma1[k] = std::exp(spec.mu1 - side.w[k]);
      side.gamma2[k] = std::exp(spec.mu2 + side.w[k]);
    }
  }
  return bd;
}

namespace {

struct PbEval {
  ScalarField c1;
  ScalarField c2;
  ScalarField f;
  double norm = 0.0;
};

PbEval pb_evaluate(const ScalarField& phi, const EquilibriumSpec& spec, const SideValues& w, const Params& params) {
  PbEval e{ScalarField(phi.grid()), ScalarField(phi.grid()), ScalarField(phi.grid())};
  for (std::size_t k = 0; k < phi.size(); ++k) {
    e.c1.values()[k] = std::exp(spec.mu1 - phi.values()[k]);
    e.c2.values()[k] = std::exp(spec.mu2 + phi.values()[k]);
  }
  e.f = dirichlet_residual(phi, e.c1 - e.c2, w, params.eps);
  e.f *= -1.0;
  e.norm = l2_norm(e.f);
  return e;
}

}  // namespace

SteadyState solve_poisson_boltzmann(const EquilibriumSpec& spec, const Params& params, double tol) {
  if (!(tol > 0.0)) throw InvalidSpec("solve_poisson_boltzmann needs tol > 0");
  params.validate();
  const Grid& g = spec.w.grid();
  const SideValues w = side_values(spec.w, &SideData::w);

  ScalarField phi = laplace_extension(g, w);
  PbEval cur = pb_evaluate(phi, spec, w, params);
  constexpr int kMaxNewton = 50;
  int it = 0;
  while (cur.norm > tol) {
    if (it >= kMaxNewton)
      throw NonConvergence("Poisson-Boltzmann Newton stalled at residual " + std::to_string(cur.norm));
    ++it;
    const ScalarField jac_diag = cur.c1 + cur.c2;
    EllipticOptions lin;
    lin.tol = std::max(0.01 * tol, 1e-6 * cur.norm);
    ScalarField rhs = cur.f;
    rhs *= -1.0;
    const ScalarField delta = solve_linear(rhs, AxisBc::Dirichlet, params.eps, jac_diag.values(), lin).solution;

    double lambda = 1.0;
    bool improved = false;
    for (; lambda >= 1.0 / 1024.0; lambda *= 0.5) {
      ScalarField trial = phi + lambda * delta;
      PbEval next = pb_evaluate(trial, spec, w, params);
      if (next.norm < cur.norm) {
        phi = std::move(trial);
        cur = std::move(next);
        improved = true;
        break;
      }
    }
    if (!improved)
      throw NonConvergence("Poisson-Boltzmann line search failed at residual " + std::to_string(cur.norm));
  }

  SteadyState s;
  s.phi = std::move(phi);
  s.c1 = std::move(cur.c1);
  s.c2 = std::move(cur.c2);
  s.u = VelocityField(g);
  s.p = s.c1 + s.c2;
  s.p *= params.kc;
  const double pm = mean(s.p);
  for (double& v : s.p.values()) v -= pm;
  s.residual = cur.norm;
  s.method = SteadyMethod::PoissonBoltzmannNewton;
  s.iterations = it;
  return s;
}

namespace {

SteadyState package(const State& s, double residual) {
  SteadyState out;
  out.c1 = s.c1;
  out.c2 = s.c2;
  out.phi = s.phi;
  out.u = s.u;
  out.p = s.p;
  out.residual = residual;
  out.method = SteadyMethod::PseudoTime;
  out.iterations = static_cast<int>(s.steps);
  out.t = s.t;
  return out;
}

}  // namespace

SteadyState solve_steady_nps(const BoundaryData& bd, const Params& params, const State* init,
                             const SteadyOptions& opts) {
  if (!(opts.tol > 0.0)) throw InvalidSpec("solve_steady_nps needs tol > 0");
  if (!bd.all_dirichlet()) throw InvalidSpec("solve_steady_nps needs Dirichlet data on every side");
  params.validate();
  bd.validate();

  State s = init ? *init : make_initial_state(bd, params, {}, opts.step.elliptic_tol);
  double r = std::numeric_limits<double>::infinity();
  while (true) {
    if (s.t >= opts.t_cap)
      throw SteadyNotConverged("pseudo-time reached t = " + std::to_string(s.t) + " with residual " +
                                   std::to_string(r),
                               package(s, r));
    State next = step(s, bd, params, opts.step);
    const double dt = next.t - s.t;
    r = (l2_norm(next.c1 - s.c1) + l2_norm(next.c2 - s.c2) + l2_norm_velocity(next.u - s.u)) / dt;
    if (opts.normalize) r /= l2_norm(next.c1) + l2_norm(next.c2);
    s = std::move(next);
    if (r < opts.tol) break;
  }

  SteadyState out = package(s, r);
  const VelocityField force = electric_force(s.c1, s.c2, s.phi, params);
  try {
    SteadyStokesResult flow = steady_stokes(force, params, opts.tol, &s.u, 100'000);
    out.u = std::move(flow.u);
    out.p = std::move(flow.p);
  } catch (const NonConvergence&) {
    // Keep the last projection pressure; it balances the stepper's velocity.
  }
  return out;
}

namespace {

double fitted_bernoulli(double x) { return x == 0.0 ? 1.0 : x / std::expm1(x); }

// Total normal flux (advective + exponentially fitted) from a to b across a
// face of width h; written as d B(x) (c_a - e^x c_b) / h with x = z (phi_b - phi_a).
double face_flux(double ca, double cb, double pa, double pb, double vel, double d, int z, double h) {
  const double x = z * (pb - pa);
  const double diffusive = d * fitted_bernoulli(x) * (ca - std::exp(x) * cb) / h;
  return diffusive + vel * (vel > 0.0 ? ca : cb);
}

double transport_residual(const SteadyState& s, const BoundaryData& bd, const Params& params, bool cation) {
  const Grid& g = s.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  const ScalarField& c = cation ? s.c1 : s.c2;
  const double d = cation ? params.d1 : params.d2;
  const int z = cation ? 1 : -1;
  auto gamma = [&](Side side, int k) {
    const SideData& sd = bd.side(side);
    return (cation ? sd.gamma1 : sd.gamma2)[static_cast<std::size_t>(k)];
  };
  auto wall = [&](Side side) { return bd.side(side).mode == BoundaryMode::Dirichlet; };
  auto wv = [&](Side side, int k) { return bd.side(side).w[static_cast<std::size_t>(k)]; };

  double sum = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      double west = 0.0, east = 0.0, south = 0.0, north = 0.0;
      if (i > 0)
        west = face_flux(c(i - 1, j), c(i, j), s.phi(i - 1, j), s.phi(i, j), s.u.ux(i, j), d, z, g.hx());
      else if (wall(Side::Left))
        west = face_flux(gamma(Side::Left, j), c(i, j), wv(Side::Left, j), s.phi(i, j), 0.0, d, z, 0.5 * g.hx());
      if (i < nx - 1)
        east = face_flux(c(i, j), c(i + 1, j), s.phi(i, j), s.phi(i + 1, j), s.u.ux(i + 1, j), d, z, g.hx());
      else if (wall(Side::Right))
        east = face_flux(c(i, j), gamma(Side::Right, j), s.phi(i, j), wv(Side::Right, j), 0.0, d, z, 0.5 * g.hx());
      if (j > 0)
        south = face_flux(c(i, j - 1), c(i, j), s.phi(i, j - 1), s.phi(i, j), s.u.uy(i, j), d, z, g.hy());
      else if (wall(Side::Bottom))
        south =
            face_flux(gamma(Side::Bottom, i), c(i, j), wv(Side::Bottom, i), s.phi(i, j), 0.0, d, z, 0.5 * g.hy());
      if (j < ny - 1)
        north = face_flux(c(i, j), c(i, j + 1), s.phi(i, j), s.phi(i, j + 1), s.u.uy(i, j + 1), d, z, g.hy());
      else if (wall(Side::Top))
        north = face_flux(c(i, j), gamma(Side::Top, i), s.phi(i, j), wv(Side::Top, i), 0.0, d, z, 0.5 * g.hy());
      const double r = (east - west) / g.hx() + (north - south) / g.hy();
      sum += r * r;
    }
  }
  return std::sqrt(sum * g.cell_area());
}

double poisson_residual(const SteadyState& s, const BoundaryData& bd, const Params& params) {
  const Grid& g = s.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  const ScalarField& f = s.phi;
  auto wv = [&](Side side, int k) { return bd.side(side).w[static_cast<std::size_t>(k)]; };
  double sum = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double c = f(i, j);
      const double west = i > 0 ? f(i - 1, j) : 2.0 * wv(Side::Left, j) - c;
      const double east = i < nx - 1 ? f(i + 1, j) : 2.0 * wv(Side::Right, j) - c;
      const double south = j > 0 ? f(i, j - 1) : 2.0 * wv(Side::Bottom, i) - c;
      const double north = j < ny - 1 ? f(i, j + 1) : 2.0 * wv(Side::Top, i) - c;
      const double lap = (west - 2.0 * c + east) / (g.hx() * g.hx()) + (south - 2.0 * c + north) / (g.hy() * g.hy());
      const double r = -params.eps * lap - (s.c1(i, j) - s.c2(i, j));
      sum += r * r;
    }
  }
  return std::sqrt(sum * g.cell_area());
}

double momentum_residual(const SteadyState& s, const Params& params) {
  const Grid& g = s.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  const VelocityField f = electric_force(s.c1, s.c2, s.phi, params);
  const VelocityField& u = s.u;
  const double ix = 1.0 / (g.hx() * g.hx());
  const double iy = 1.0 / (g.hy() * g.hy());
  double sum = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      const double c = u.ux(i, j);
      const double south = j > 0 ? u.ux(i, j - 1) : -c;
      const double north = j < ny - 1 ? u.ux(i, j + 1) : -c;
      const double lap = ix * (u.ux(i - 1, j) - 2.0 * c + u.ux(i + 1, j)) + iy * (south - 2.0 * c + north);
      const double r = -params.nu * lap + (s.p(i, j) - s.p(i - 1, j)) / g.hx() - f.ux(i, j);
      sum += r * r;
    }
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double c = u.uy(i, j);
      const double west = i > 0 ? u.uy(i - 1, j) : -c;
      const double east = i < nx - 1 ? u.uy(i + 1, j) : -c;
      const double lap = ix * (west - 2.0 * c + east) + iy * (u.uy(i, j - 1) - 2.0 * c + u.uy(i, j + 1));
      const double r = -params.nu * lap + (s.p(i, j) - s.p(i, j - 1)) / g.hy() - f.uy(i, j);
      sum += r * r;
    }
  return std::sqrt(sum * g.cell_area());
}

double divergence_residual(const SteadyState& s) {
  const Grid& g = s.grid();
  double sum = 0.0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const double r = (s.u.ux(i + 1, j) - s.u.ux(i, j)) / g.hx() + (s.u.uy(i, j + 1) - s.u.uy(i, j)) / g.hy();
      sum += r * r;
    }
  return std::sqrt(sum * g.cell_area());
}

}  // namespace

SteadyResidual steady_residual_parts(const SteadyState& s, const BoundaryData& bd, const Params& params) {
  if (!(s.grid() == bd.grid())) throw InvalidSpec("steady_residual: state and boundary grids differ");
  SteadyResidual r;
  r.np1 = transport_residual(s, bd, params, true);
  r.np2 = transport_residual(s, bd, params, false);
  r.poisson = poisson_residual(s, bd, params);
  r.momentum = momentum_residual(s, params);
  r.divergence = divergence_residual(s);
  return r;
}

double steady_residual(const SteadyState& s, const BoundaryData& bd, const Params& params) {
  return steady_residual_parts(s, bd, params).total();
}

}  // namespace nps
