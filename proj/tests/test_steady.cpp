#include <doctest.h>

#include <cmath>
#include <random>

#include "nps/diagnostics.hpp"
#include "nps/elliptic.hpp"
#include "nps/steady.hpp"
#include "support.hpp"

using namespace nps;
using nps::testing::kPi;

namespace {

BoundaryData side_sinusoid(const Grid& g, double a) {
  return BoundaryData::from_functions(
      g, [](const BoundaryFace&) { return 1.0; }, [](const BoundaryFace&) { return 1.0; },
      [=](const BoundaryFace& f) { return f.side == Side::Bottom ? a * std::sin(kPi * f.x) : 0.0; });
}

// Damped fixed point for -eps Lap phi + sigma phi = sigma phi_k + e^{mu1 - phi_k} - e^{mu2 + phi_k}.
// With sigma above the largest derivative of the exponentials the map is a
// contraction, so it converges without Newton's method.
ScalarField pb_fixed_point(const EquilibriumSpec& spec, const Params& p, double sigma) {
  const Grid& g = spec.w.grid();
  const SideValues w = side_values(spec.w, &SideData::w);
  std::vector<double> diag(static_cast<std::size_t>(g.cells()), sigma);
  EllipticOptions o;
  o.tol = 1e-13;
  ScalarField phi(g);
  for (int it = 0; it < 2000; ++it) {
    ScalarField rhs(g);
    for (std::size_t k = 0; k < rhs.size(); ++k) {
      const double v = phi.values()[k];
      rhs.values()[k] = sigma * v + std::exp(spec.mu1 - v) - std::exp(spec.mu2 + v);
    }
    ScalarField next = solve_dirichlet(rhs, w, p.eps, diag, o).solution;
    const double change = linf_norm(next - phi);
    phi = std::move(next);
    if (change < 1e-13) break;
  }
  return phi;
}

}  // namespace

TEST_CASE("Poisson-Boltzmann neutral states") {
  Grid g({16, 16, 1.0, 1.0});
  Params p;
  auto s = solve_poisson_boltzmann({0.0, 0.0, BoundaryData::uniform(g, 1, 1, 0)}, p);
  CHECK(linf_norm(s.phi) <= 1e-12);
  CHECK(linf_norm(s.c1 - ScalarField(g, 1.0)) <= 1e-12);
  CHECK(linf_norm(s.c2 - ScalarField(g, 1.0)) <= 1e-12);
  CHECK(linf_norm_velocity(s.u) == 0.0);
  CHECK(s.method == SteadyMethod::PoissonBoltzmannNewton);

  auto m = solve_poisson_boltzmann({0.4, 0.4, BoundaryData::uniform(g, 1, 1, 0)}, p);
  CHECK(linf_norm(m.phi) <= 1e-12);
  CHECK(linf_norm(m.c1 - ScalarField(g, std::exp(0.4))) <= 1e-12);
  CHECK(linf_norm(m.c2 - ScalarField(g, std::exp(0.4))) <= 1e-12);
}

TEST_CASE("Poisson-Boltzmann against a damped fixed point") {
  Grid g({24, 24, 1.0, 1.0});
  Params p;
  p.eps = 0.2;
  const double a = 0.3;
  EquilibriumSpec spec{0.1, -0.2, side_sinusoid(g, a)};
  auto s = solve_poisson_boltzmann(spec, p, 1e-12);
  CHECK(s.residual <= 1e-12);
  CHECK(s.iterations <= 10);
  CHECK(linf_norm(s.phi) < a);
  auto oracle = pb_fixed_point(spec, p, 2.0 * std::exp(0.5));
  CHECK(linf_norm(s.phi - oracle) <= 1e-10);
  for (std::size_t k = 0; k < s.c1.size(); ++k) {
    CHECK(s.c1.values()[k] == doctest::Approx(std::exp(0.1 - s.phi.values()[k])).epsilon(1e-14));
    CHECK(s.c2.values()[k] == doctest::Approx(std::exp(-0.2 + s.phi.values()[k])).epsilon(1e-14));
  }

  // Stronger screening (smaller eps) pulls the interior potential down.
  Params screened = p;
  screened.eps = 0.02;
  auto t = solve_poisson_boltzmann({0.0, 0.0, side_sinusoid(g, a)}, screened, 1e-12);
  auto u = solve_poisson_boltzmann({0.0, 0.0, side_sinusoid(g, a)}, p, 1e-12);
  CHECK(std::abs(t.phi(12, 12)) < std::abs(u.phi(12, 12)));
  CHECK(linf_norm(t.phi) < a);
}

TEST_CASE("steady residual checker") {
  Grid g({16, 16, 1.0, 1.0});
  Params p;
  auto bd = BoundaryData::uniform(g, 0.8, 0.8, 0.2);
  SteadyState trivial;
  trivial.c1 = ScalarField(g, 0.8);
  trivial.c2 = ScalarField(g, 0.8);
  trivial.phi = ScalarField(g, 0.2);
  trivial.u = VelocityField(g);
  trivial.p = ScalarField(g);
  CHECK(steady_residual(trivial, bd, p) <= 1e-12);

  EquilibriumSpec spec{0.0, 0.0, side_sinusoid(g, 0.2)};
  auto pb = solve_poisson_boltzmann(spec, p, 1e-11);
  auto ebd = equilibrium_boundary(spec);
  const auto parts = steady_residual_parts(pb, ebd, p);
  MESSAGE("PB residual parts " << parts.np1 << " " << parts.np2 << " " << parts.poisson << " " << parts.momentum
                               << " " << parts.divergence);
  CHECK(parts.total() <= 1e-8);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ud(-1e-3, 1e-3);
  SteadyState noisy = pb;
  for (double& v : noisy.c1.values()) v += ud(rng);
  CHECK(steady_residual(noisy, ebd, p) >= steady_residual(pb, ebd, p) + 1e-4);
}

TEST_CASE("pseudo-time steady states") {
  Grid g({16, 16, 1.0, 1.0});
  Params p;
  SteadyOptions o;
  o.tol = 1e-8;

  auto c = solve_steady_nps(BoundaryData::uniform(g, 0.6, 0.6, 1.5), p, nullptr, o);
  CHECK(linf_norm(c.c1 - ScalarField(g, 0.6)) <= 1e-12);
  CHECK(linf_norm(c.phi - ScalarField(g, 1.5)) <= 1e-9);
  CHECK(linf_norm_velocity(c.u) <= 1e-12);

  EquilibriumSpec spec{0.0, 0.0, side_sinusoid(g, 0.2)};
  auto pb = solve_poisson_boltzmann(spec, p, 1e-11);
  auto ps = solve_steady_nps(equilibrium_boundary(spec), p, nullptr, o);
  CHECK(ps.method == SteadyMethod::PseudoTime);
  CHECK(ps.residual < o.tol);
  CHECK(linf_norm(ps.phi - pb.phi) <= 10 * o.tol + g.hx() * g.hx());
  CHECK(l2_norm_velocity(ps.u) <= o.tol);

  SteadyOptions capped = o;
  capped.t_cap = 1e-3;
  try {
    solve_steady_nps(equilibrium_boundary(spec), p, nullptr, capped);
    FAIL("expected SteadyNotConverged");
  } catch (const SteadyNotConverged& e) {
    CHECK(e.best.t >= capped.t_cap);
    CHECK(e.best.residual > capped.tol);
  }
  BoundaryData blocking = BoundaryData::uniform(g, 1, 1, 0);
  blocking.set_mode(BoundaryMode::Blocking);
  CHECK_THROWS_AS(solve_steady_nps(blocking, p, nullptr, o), InvalidSpec);
}

TEST_CASE("small nonequilibrium data: flow, bounds and uniqueness") {
  Grid g({16, 16, 1.0, 1.0});
  Params p;
  SteadyOptions o;
  o.tol = 1e-9;
  auto bd = nps::testing::flow_dataset(g, 0.05);
  auto s = solve_steady_nps(bd, p, nullptr, o);
  auto control = solve_steady_nps(nps::testing::equilibrium_dataset(bd), p, nullptr, o);
  MESSAGE("flow " << linf_norm_velocity(s.u) << " control " << linf_norm_velocity(control.u));
  CHECK(linf_norm_velocity(s.u) > 10 * kDefaultEllipticTol);
  CHECK(linf_norm_velocity(s.u) > 1e3 * linf_norm_velocity(control.u));

  const auto cls = classify_boundary(bd, 1e-10);
  CHECK(linf_norm(s.c1) <= 1.02 * cls.a_gamma);
  CHECK(linf_norm(s.c2) <= 1.02 * cls.a_gamma);
  CHECK(min_value(s.c1) > 0.0);

  InitialCondition ic;
  ic.kind = InitKind::Random;
  ic.seed = 5;
  State init = make_initial_state(bd, p, ic);
  auto r = solve_steady_nps(bd, p, &init, o);
  CHECK(linf_norm(r.c1 - s.c1) <= 10 * o.tol);
  CHECK(linf_norm(r.c2 - s.c2) <= 10 * o.tol);
  CHECK(linf_norm(r.phi - s.phi) <= 10 * o.tol);
  CHECK(linf_norm_velocity(r.u - s.u) <= 10 * o.tol);
  CHECK(steady_residual(s, bd, p) <= 1e-6);
}
