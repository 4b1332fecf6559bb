#include <doctest.h>

#include <cmath>
#include <random>

#include "nps/elliptic.hpp"
#include "nps/stokes.hpp"
#include "support.hpp"

using namespace nps;
using nps::testing::kPi;

namespace {

VelocityField random_solenoidal(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  VelocityField u(g);
  for (double& v : u.ux_values()) v = nd(rng);
  for (double& v : u.uy_values()) v = nd(rng);
  u.apply_boundary();
  return solve_pressure_projection(u, 1.0, 1e-12).u;
}

VelocityField curl_force(const Grid& g, double s) {
  auto f = VelocityField::sample(
      g, [=](double x, double y) { return -s * std::sin(kPi * x) * std::cos(kPi * y); },
      [=](double x, double y) { return s * std::cos(kPi * x) * std::sin(kPi * y); });
  f.apply_boundary();
  return f;
}

}  // namespace

TEST_CASE("logarithmic mean") {
  CHECK(log_mean(2.0, 2.0) == 2.0);
  CHECK(log_mean(std::exp(1.0), 1.0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
  CHECK(log_mean(1.0, 1.0 + 1e-12) == doctest::Approx(1.0 + 0.5e-12).epsilon(1e-15));
  CHECK(log_mean(0.0, 1.0) == 0.0);
  CHECK(log_mean(3.0, 5.0) == doctest::Approx(log_mean(5.0, 3.0)).epsilon(1e-15));
}

TEST_CASE("electric force") {
  Grid g({12, 10, 1.0, 1.0});
  auto phi = ScalarField::sample(g, [](double x, double y) { return x + 0.3 * y * y; });
  Params p;
  p.kc = 2.0;
  CHECK(linf_norm_velocity(electric_force(ScalarField(g, 1.3), ScalarField(g, 1.3), phi, p)) == 0.0);
  CHECK(linf_norm_velocity(electric_force(ScalarField(g, 2.0), ScalarField(g, 1.0), ScalarField(g, 4.0), p)) ==
        0.0);

  auto lin = ScalarField::sample(g, [](double x, double) { return x; });
  auto f = electric_force(ScalarField(g, 2.0), ScalarField(g, 1.0), lin, p);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 1; i < g.nx(); ++i) CHECK(f.ux(i, j) == doctest::Approx(-2.0).epsilon(1e-12));
  for (int j = 0; j < g.ny(); ++j) {
    CHECK(f.ux(0, j) == 0.0);
    CHECK(f.ux(g.nx(), j) == 0.0);
  }
  for (double v : f.uy_values()) CHECK(v == 0.0);

  // Boltzmann profiles: the force is an exact discrete gradient of K (c1 + c2).
  auto bphi = ScalarField::sample(g, [](double x, double y) { return 0.7 * std::sin(3 * x) * std::cos(2 * y); });
  ScalarField c1(g), c2(g);
  for (std::size_t k = 0; k < c1.size(); ++k) {
    c1.values()[k] = 1.4 * std::exp(-bphi.values()[k]);
    c2.values()[k] = 0.6 * std::exp(bphi.values()[k]);
  }
  auto fb = electric_force(c1, c2, bphi, p);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 1; i < g.nx(); ++i) {
      const double expect = p.kc * (c1(i, j) + c2(i, j) - c1(i - 1, j) - c2(i - 1, j)) / g.hx();
      CHECK(fb.ux(i, j) == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("Stokes step basics") {
  Grid g({16, 16, 1.0, 1.0});
  Params p;
  const double dt = 0.8 * viscous_dt_limit(g, p);
  CHECK(viscous_dt_limit(g, p) == doctest::Approx(0.25 * g.hx() * g.hx()));
  auto zero = stokes_step(VelocityField(g), VelocityField(g), p, dt);
  CHECK(linf_norm_velocity(zero.u) == 0.0);
  CHECK_THROWS_AS(stokes_step(VelocityField(g), VelocityField(g), p, 2 * viscous_dt_limit(g, p)), TimeStepTooLarge);

  // A gradient body force is absorbed by the pressure.
  auto psi = ScalarField::sample(g, [](double x, double y) { return std::cos(kPi * x) * std::cos(2 * kPi * y); });
  auto force = grad(psi);
  force.apply_boundary();
  auto r = stokes_step(VelocityField(g), force, p, dt, 1e-12);
  const double pushed = dt * l2_norm_velocity(force);
  MESSAGE("gradient force remainder " << l2_norm_velocity(r.u) / pushed);
  CHECK(l2_norm_velocity(r.u) <= 1e-12 + 0.05 * pushed);
  CHECK(l2_norm(divergence(r.u)) <= 1e-12);
  CHECK(std::abs(mean(r.p)) <= 1e-12);
}

TEST_CASE("viscous energy decay without forcing") {
  Grid g({20, 20, 1.0, 1.0});
  Params p;
  p.nu = 0.5;
  const double dt = 0.8 * viscous_dt_limit(g, p);
  auto u = random_solenoidal(g, 3);
  double prev = l2_norm_velocity(u);
  for (int k = 0; k < 40; ++k) {
    u = stokes_step(u, VelocityField(g), p, dt).u;
    const double now = l2_norm_velocity(u);
    CHECK(now <= prev * (1 + 1e-12));
    prev = now;
  }
}

TEST_CASE("periodic eigenmode decays at 2 nu pi^2") {
  // Period 2 in both directions so the unit-wavenumber mode fits.
  Grid g(GridSpec{32, 32, 2.0, 2.0}, true);
  Params p;
  p.nu = 0.3;
  auto u = VelocityField::sample(
      g, [](double x, double y) { return std::sin(kPi * x) * std::cos(kPi * y); },
      [](double x, double y) { return -std::cos(kPi * x) * std::sin(kPi * y); });
  u.apply_boundary();
  u = solve_pressure_projection(u, 1.0, 1e-13).u;
  const double dt = 0.5 * viscous_dt_limit(g, p);
  const double e0 = l2_norm_velocity(u);
  const int steps = 200;
  for (int k = 0; k < steps; ++k) u = stokes_step(u, VelocityField(g), p, dt, 1e-13).u;
  const double rate = std::log(e0 / l2_norm_velocity(u)) / (steps * dt);
  MESSAGE("eigenmode rate " << rate << " expected " << 2 * p.nu * kPi * kPi);
  CHECK(rate == doctest::Approx(2 * p.nu * kPi * kPi).epsilon(0.05));
}

TEST_CASE("steady Stokes") {
  Grid g({16, 16, 1.0, 1.0});
  Params p;
  auto none = steady_stokes(VelocityField(g), p, 1e-8);
  CHECK(linf_norm_velocity(none.u) == 0.0);
  CHECK(linf_norm(none.p) <= 1e-14);

  auto a = steady_stokes(curl_force(g, 1.0), p, 1e-9);
  auto b = steady_stokes(curl_force(g, 2.5), p, 1e-9);
  CHECK(linf_norm_velocity(a.u) > 1e-3);
  CHECK(linf_norm_velocity(b.u) / linf_norm_velocity(a.u) == doctest::Approx(2.5).epsilon(1e-6));
  CHECK(linf_norm_velocity(b.u - 2.5 * a.u) <= 1e-6 * linf_norm_velocity(b.u));
  CHECK(l2_norm(divergence(a.u)) <= 1e-9);

  auto psi = ScalarField::sample(g, [](double x, double y) { return std::sin(kPi * x) * y * y; });
  auto f = grad(psi);
  f.apply_boundary();
  auto s = steady_stokes(f, p, 1e-9);
  MESSAGE("gradient-forced steady velocity " << linf_norm_velocity(s.u));
  CHECK(linf_norm_velocity(s.u) <= 0.05 * linf_norm_velocity(f));
  auto shifted = psi - ScalarField(g, mean(psi));
  CHECK(linf_norm(s.p - shifted) <= 0.05 * linf_norm(shifted));

  CHECK_THROWS_AS(steady_stokes(curl_force(g, 1.0), p, 1e-9, nullptr, 3), NonConvergence);
}
