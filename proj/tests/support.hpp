#pragma once

// Shared fixtures for the unit and acceptance tests.

#include <cmath>
#include <numbers>
#include <random>

#include "nps/grid.hpp"

namespace nps::testing {

inline constexpr double kPi = std::numbers::pi;

/// gamma1 - gamma2 = a sin(2 pi x) and W = a cos(2 pi x) on the bottom side,
/// gamma_i = 1 and W = a elsewhere; the flow criterion is -pi a^2.
inline BoundaryData flow_dataset(const Grid& g, double a, double level = 1.0) {
  return BoundaryData::from_functions(
      g,
      [=](const BoundaryFace& f) { return level + (f.side == Side::Bottom ? 0.5 * a * std::sin(2 * kPi * f.x) : 0.0); },
      [=](const BoundaryFace& f) { return level - (f.side == Side::Bottom ? 0.5 * a * std::sin(2 * kPi * f.x) : 0.0); },
      [=](const BoundaryFace& f) { return f.side == Side::Bottom ? a * std::cos(2 * kPi * f.x) : a; });
}

/// Equilibrium data gamma1 = e^{mu1 - W}, gamma2 = e^{mu2 + W} for the same W.
inline BoundaryData equilibrium_dataset(const BoundaryData& with_w, double mu1 = 0.0, double mu2 = 0.0) {
  BoundaryData bd = with_w;
  for (Side s : kSides) {
    auto& side = bd.side(s);
    side.mode = BoundaryMode::Dirichlet;
    for (std::size_t k = 0; k < side.w.size(); ++k) {
      side.gamma1[k] = std::exp(mu1 - side.w[k]);
      side.gamma2[k] = std::exp(mu2 + side.w[k]);
    }
  }
  return bd;
}

inline ScalarField random_field(const Grid& g, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  ScalarField f(g);
  for (double& v : f.values()) v = d(rng);
  return f;
}

}  // namespace nps::testing
