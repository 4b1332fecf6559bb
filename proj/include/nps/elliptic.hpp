#pragma once

// Constant-coefficient elliptic solves on the cell-centered grid: the
// potential equation, harmonic extensions and the pressure projection.
//
// All operators use the 5-point Laplacian. Dirichlet data enter through a
// linearly extrapolated ghost cell, so the face value equals the prescribed
// sample; Neumann walls mirror the interior value.

#include <array>
#include <span>
#include <vector>

#include "nps/errors.hpp"
#include "nps/grid.hpp"

namespace nps {

inline constexpr double kDefaultEllipticTol = 1e-10;

enum class AxisBc { Dirichlet, Neumann, Periodic };

enum class Preconditioner {
  Jacobi,
  /// Exact inverse of the shifted constant-coefficient operator, applied by
  /// separable eigen-decomposition of the 1D second-difference matrices.
  Spectral,
};

struct EllipticOptions {
  double tol = kDefaultEllipticTol;
  Preconditioner preconditioner = Preconditioner::Spectral;
  int max_iterations = 0;  // 0 selects 10 * cells
};

struct EllipticSolveReport {
  int iterations = 0;
  double residual_l2 = 0.0;
  bool converged = false;
};

class EllipticNonConvergence : public NonConvergence {
 public:
  EllipticNonConvergence(const std::string& what, EllipticSolveReport report)
      : NonConvergence(what), report(report) {}
  EllipticSolveReport report;
};

struct EllipticResult {
  ScalarField solution;
  EllipticSolveReport report;
};

/// Per-side Dirichlet samples, indexed by Side.
using SideValues = std::array<std::vector<double>, 4>;

SideValues side_values(const BoundaryData& bd, std::vector<double> SideData::*member);

/// Applies scale * (-Lap_h) f + diag * f with homogeneous conditions of kind bc
/// on every wall. An empty diag means zero.
ScalarField apply_operator(const ScalarField& f, AxisBc bc, double scale, std::span<const double> diag = {});

/// Solves scale * (-Lap_h) x + diag * x = rhs by preconditioned conjugate
/// gradients. With bc != Dirichlet and no diag the system is singular and the
/// solution is returned with zero mean.
EllipticResult solve_linear(const ScalarField& rhs, AxisBc bc, double scale, std::span<const double> diag,
                            const EllipticOptions& opts = {}, const ScalarField* initial = nullptr);

/// Solves scale * (-Lap_h) x + diag * x = rhs with inhomogeneous Dirichlet data.
EllipticResult solve_dirichlet(const ScalarField& rhs, const SideValues& boundary, double scale,
                               std::span<const double> diag, const EllipticOptions& opts = {},
                               const ScalarField* initial = nullptr);

/// Residual rhs - (scale * (-Lap_h) x + diag * x) for Dirichlet data.
ScalarField dirichlet_residual(const ScalarField& x, const ScalarField& rhs, const SideValues& boundary,
                               double scale, std::span<const double> diag = {});

/// -eps Lap_h phi = rho with phi = W on the boundary.
EllipticResult solve_potential(const ScalarField& rho, const BoundaryData& bd, const Params& params,
                               const EllipticOptions& opts = {}, const ScalarField* initial = nullptr);

/// Discrete harmonic function whose trace is bd's potential samples.
ScalarField harmonic_extension(const BoundaryData& bd, double tol = kDefaultEllipticTol);

/// Discrete harmonic function with the given per-side trace.
ScalarField laplace_extension(const Grid& grid, const SideValues& boundary, double tol = kDefaultEllipticTol);

/// Face-normal centered differences. Wall faces extrapolate linearly from the
/// two nearest interior faces, which keeps the operator exact for quadratics.
VelocityField grad(const ScalarField& f);

/// Cell divergence of a face field.
ScalarField divergence(const VelocityField& u);

struct ProjectionResult {
  ScalarField phi;
  VelocityField u;
  EllipticSolveReport report;
};

/// Removes the gradient part of u_star: u = u_star - dt grad(phi) with
/// homogeneous Neumann phi (zero mean) and ||div u||_2 <= tol.
ProjectionResult solve_pressure_projection(const VelocityField& u_star, double dt, double tol = kDefaultEllipticTol,
                                           Preconditioner preconditioner = Preconditioner::Spectral);

}  // namespace nps
