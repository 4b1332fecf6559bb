#include <doctest.h>

#include <cmath>
#include <random>

#include "nps/elliptic.hpp"
#include "support.hpp"

using namespace nps;
using nps::testing::kPi;

namespace {

double potential_mms_error(int n) {
  Grid g({n, n, 1.0, 1.0});
  Params p;
  p.eps = 0.7;
  auto exact = [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); };
  auto rho = ScalarField::sample(g, [&](double x, double y) { return 2 * p.eps * kPi * kPi * exact(x, y); });
  auto phi = solve_potential(rho, BoundaryData::uniform(g, 1, 1, 0), p).solution;
  return linf_norm(phi - ScalarField::sample(g, exact));
}

double harmonic_error(int n) {
  Grid g({n, n, 1.0, 1.0});
  auto bd = BoundaryData::from_functions(
      g, [](const BoundaryFace&) { return 1.0; }, [](const BoundaryFace&) { return 1.0; },
      [](const BoundaryFace& f) { return f.x * f.x - f.y * f.y + 0.3 * std::exp(f.x) * std::cos(f.y); });
  auto w = harmonic_extension(bd, 1e-12);
  return linf_norm(w - ScalarField::sample(g, [](double x, double y) {
                     return x * x - y * y + 0.3 * std::exp(x) * std::cos(y);
                   }));
}

}  // namespace

TEST_CASE("potential of a constant boundary value") {
  Grid g({16, 16, 1.0, 1.0});
  auto r = solve_potential(ScalarField(g), BoundaryData::uniform(g, 1, 1, 5.0), Params{});
  CHECK(r.report.converged);
  CHECK(linf_norm(r.solution - ScalarField(g, 5.0)) <= 1e-9);
}

TEST_CASE("potential manufactured solution converges at second order") {
  const double e32 = potential_mms_error(32);
  const double e64 = potential_mms_error(64);
  MESSAGE("potential errors " << e32 << " " << e64 << " ratio " << e32 / e64);
  CHECK(e32 / e64 == doctest::Approx(4.0).epsilon(0.125));
}

TEST_CASE("potential is linear in the charge and in 1/eps") {
  Grid g({24, 24, 1.0, 1.0});
  auto bd = BoundaryData::uniform(g, 1, 1, 0.0);
  std::mt19937_64 rng(5);
  auto r1 = nps::testing::random_field(g, rng, -1, 1);
  auto r2 = nps::testing::random_field(g, rng, -1, 1);
  Params p;
  EllipticOptions o;
  o.tol = 1e-12;
  auto a = solve_potential(r1, bd, p, o).solution;
  auto b = solve_potential(r2, bd, p, o).solution;
  auto ab = solve_potential(r1 + r2, bd, p, o).solution;
  CHECK(linf_norm(ab - a - b) <= 1e-9);

  Params p2 = p;
  p2.eps = 2 * p.eps;
  auto half = solve_potential(r1, bd, p2, o).solution;
  CHECK(linf_norm(2.0 * half - a) <= 1e-9);
}

TEST_CASE("discrete maximum principle") {
  Grid g({20, 20, 1.0, 1.0});
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ud(-2, 3);
  auto bd = BoundaryData::from_functions(
      g, [](const BoundaryFace&) { return 1.0; }, [](const BoundaryFace&) { return 1.0; },
      [&](const BoundaryFace&) { return ud(rng); });
  auto w = bd.w_trace();
  const double lo = *std::min_element(w.begin(), w.end());
  const double hi = *std::max_element(w.begin(), w.end());
  auto phi = solve_potential(ScalarField(g), bd, Params{}).solution;
  CHECK(min_value(phi) >= lo - 1e-9);
  CHECK(linf_norm(phi) <= std::max(std::abs(lo), std::abs(hi)) + 1e-9);
  for (double v : phi.values()) CHECK(v <= hi + 1e-9);
}

TEST_CASE("harmonic extensions") {
  Grid g({16, 16, 1.0, 1.0});
  auto c = harmonic_extension(BoundaryData::uniform(g, 1, 1, -2.5));
  CHECK(linf_norm(c - ScalarField(g, -2.5)) <= 1e-9);

  auto lin = BoundaryData::from_functions(
      g, [](const BoundaryFace&) { return 1.0; }, [](const BoundaryFace&) { return 1.0; },
      [](const BoundaryFace& f) { return f.x; });
  auto wx = harmonic_extension(lin, 1e-12);
  CHECK(linf_norm(wx - ScalarField::sample(g, [](double x, double) { return x; })) <= 1e-10);

  const double e16 = harmonic_error(16);
  const double e32 = harmonic_error(32);
  MESSAGE("harmonic errors " << e16 << " " << e32 << " ratio " << e16 / e32);
  CHECK(e32 < 1e-3);
  CHECK(e16 / e32 == doctest::Approx(4.0).epsilon(0.125));

  // The polynomial x^2 - y^2 is reproduced up to the ghost-cell corner error.
  auto quad = BoundaryData::from_functions(
      g, [](const BoundaryFace&) { return 1.0; }, [](const BoundaryFace&) { return 1.0; },
      [](const BoundaryFace& f) { return f.x * f.x - f.y * f.y; });
  auto wq = harmonic_extension(quad, 1e-12);
  CHECK(linf_norm(wq - ScalarField::sample(g, [](double x, double y) { return x * x - y * y; })) <=
        g.hx() * g.hx());
}

TEST_CASE("face gradient") {
  Grid g({16, 16, 1.0, 1.0});
  auto z = grad(ScalarField(g, 3.0));
  CHECK(linf_norm_velocity(z) == 0.0);

  auto d = grad(ScalarField::sample(g, [](double x, double) { return 3 * x; }));
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i) CHECK(d.ux(i, j) == doctest::Approx(3.0).epsilon(1e-12));
  for (double v : d.uy_values()) CHECK(std::abs(v) <= 1e-12);

  auto err = [](int n) {
    Grid gn({n, n, 1.0, 1.0});
    auto gs = grad(ScalarField::sample(gn, [](double x, double) { return std::sin(kPi * x); }));
    double e = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i <= n; ++i) e = std::max(e, std::abs(gs.ux(i, j) - kPi * std::cos(kPi * gn.xf(i))));
    return e;
  };
  const double r = err(32) / err(64);
  MESSAGE("gradient error ratio " << r);
  CHECK(r == doctest::Approx(4.0).epsilon(0.125));
}

TEST_CASE("pressure projection") {
  Grid g({24, 24, 1.0, 1.0});
  // The discrete curl of a streamfunction vanishing on the walls is already
  // divergence free and tangent compatible.
  auto psi = [](double x, double y) { return std::pow(std::sin(kPi * x) * std::sin(kPi * y), 2); };
  VelocityField u(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i) u.ux(i, j) = (psi(g.xf(i), g.yf(j + 1)) - psi(g.xf(i), g.yf(j))) / g.hy();
  for (int j = 0; j <= g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) u.uy(i, j) = -(psi(g.xf(i + 1), g.yf(j)) - psi(g.xf(i), g.yf(j))) / g.hx();
  u.apply_boundary();
  CHECK(l2_norm(divergence(u)) <= 1e-12);
  auto same = solve_pressure_projection(u, 1.0);
  CHECK(linf_norm(same.phi) <= 1e-9);
  CHECK(linf_norm_velocity(same.u - u) <= 1e-9);

  auto err = [](int n) {
    Grid gn({n, n, 1.0, 1.0});
    auto f = VelocityField::sample(
        gn, [](double x, double y) { return kPi * std::cos(kPi * x) * std::sin(kPi * y); },
        [](double x, double y) { return kPi * std::sin(kPi * x) * std::cos(kPi * y); });
    f.apply_boundary();
    auto r = solve_pressure_projection(f, 1.0);
    CHECK(l2_norm(divergence(r.u)) <= kDefaultEllipticTol);
    return l2_norm_velocity(r.u);
  };
  const double e16 = err(16);
  const double e32 = err(32);
  // Separable modes are exact discrete gradients, so only round-off remains.
  MESSAGE("projected gradient remainder " << e16 << " " << e32);
  CHECK(e16 <= 1e-10);
  CHECK(e32 <= 1e-10);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  VelocityField w(g);
  for (double& v : w.ux_values()) v = nd(rng);
  for (double& v : w.uy_values()) v = nd(rng);
  w.apply_boundary();
  auto pr = solve_pressure_projection(w, 0.3, 1e-10);
  CHECK(l2_norm(divergence(pr.u)) <= 1e-10);
  CHECK(std::abs(mean(pr.phi)) <= 1e-12);
  auto gp = grad(pr.phi);
  double mismatch = 0.0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 1; i < g.nx(); ++i) mismatch = std::max(mismatch, std::abs(pr.u.ux(i, j) - (w.ux(i, j) - 0.3 * gp.ux(i, j))));
  for (int j = 1; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) mismatch = std::max(mismatch, std::abs(pr.u.uy(i, j) - (w.uy(i, j) - 0.3 * gp.uy(i, j))));
  CHECK(mismatch <= 1e-12);
  for (int j = 0; j < g.ny(); ++j) CHECK(pr.u.ux(0, j) == 0.0);
}

TEST_CASE("preconditioners agree and iteration caps raise") {
  Grid g({20, 20, 1.0, 1.0});
  std::mt19937_64 rng(4);
  auto rhs = nps::testing::random_field(g, rng, -1, 1);
  EllipticOptions spectral;
  spectral.tol = 1e-12;
  EllipticOptions jacobi = spectral;
  jacobi.preconditioner = Preconditioner::Jacobi;
  auto a = solve_linear(rhs, AxisBc::Dirichlet, 0.5, {}, spectral);
  auto b = solve_linear(rhs, AxisBc::Dirichlet, 0.5, {}, jacobi);
  CHECK(linf_norm(a.solution - b.solution) <= 1e-9);
  CHECK(a.report.iterations < b.report.iterations);

  EllipticOptions capped = jacobi;
  capped.max_iterations = 2;
  CHECK_THROWS_AS(solve_linear(rhs, AxisBc::Dirichlet, 0.5, {}, capped), EllipticNonConvergence);
  CHECK_THROWS_AS(solve_linear(rhs, AxisBc::Dirichlet, 0.5, {}, capped), NonConvergence);
}
