#pragma once

#include <cstdint>

#include "nps/grid.hpp"

namespace nps {

/// Discrete fields of the coupled system at one time instant.
struct State {
  double t = 0.0;
  std::int64_t steps = 0;
  ScalarField c1;
  ScalarField c2;
  ScalarField phi;
  VelocityField u;
  ScalarField p;

  const Grid& grid() const { return c1.grid(); }
  ScalarField rho() const { return c1 - c2; }

  /// Fields at rest: concentrations c1, c2, zero potential, velocity and pressure.
  static State at_rest(const Grid& grid, double c1 = 1.0, double c2 = 1.0) {
    State s;
    s.c1 = ScalarField(grid, c1);
    s.c2 = ScalarField(grid, c2);
    s.phi = ScalarField(grid);
    s.u = VelocityField(grid);
    s.p = ScalarField(grid);
    return s;
  }
};

enum class SteadyMethod { PoissonBoltzmannNewton, PseudoTime };

/// Converged steady fields with the residual they were solved to.
struct SteadyState {
  ScalarField c1;
  ScalarField c2;
  ScalarField phi;
  VelocityField u;
  ScalarField p;
  double residual = 0.0;
  SteadyMethod method = SteadyMethod::PseudoTime;
  int iterations = 0;  // Newton iterations or pseudo-time steps
  double t = 0.0;      // pseudo-time reached; zero for Newton

  const Grid& grid() const { return c1.grid(); }

  State as_state() const {
    State s;
    s.c1 = c1;
    s.c2 = c2;
    s.phi = phi;
    s.u = u;
    s.p = p;
    return s;
  }
};

inline const char* to_string(SteadyMethod m) {
  return m == SteadyMethod::PoissonBoltzmannNewton ? "pb-newton" : "pseudo-time";
}

}  // namespace nps
