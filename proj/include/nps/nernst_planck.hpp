#pragma once

// Ionic transport: first-order upwind advection followed by an explicit
// Scharfetter-Gummel drift-diffusion update. The exponentially fitted face
// flux vanishes identically on Boltzmann profiles, so equilibria of the
// continuous problem are exact fixed points of the discrete one.

#include "nps/grid.hpp"
#include "nps/state.hpp"

namespace nps {

enum class Species { Cation, Anion };

struct IonSpec {
  double diffusivity = 1.0;
  int valence = 1;  // +1 or -1
};

IonSpec ion_spec(const Params& params, Species species);

/// B(x) = x / (e^x - 1), B(0) = 1.
double bernoulli(double x);

/// Face-normal flux from the left to the right cell,
///   F = (d/h) [B(z dphi) c_left - B(-z dphi) c_right],  dphi = phi_right - phi_left,
/// which discretizes -d (dc/dn + z c dphi/dn).
double sg_edge_flux(double c_left, double c_right, double dphi, double d, double h, int z);

/// Scharfetter-Gummel fluxes on every face (stored in the MAC layout). Dirichlet
/// walls use the half-cell flux to the boundary sample (gamma_i, W); blocking
/// walls carry zero total flux.
VelocityField sg_face_fluxes(const ScalarField& c, const ScalarField& phi, const BoundaryData& bd,
                             Species species, const Params& params);

/// -div J for the given species.
ScalarField drift_diffusion_rate(const ScalarField& c, const ScalarField& phi, const BoundaryData& bd,
                                 Species species, const Params& params);

/// -div(u c) with first-order upwinding; wall faces carry no advective flux.
ScalarField advection_rate(const ScalarField& c, const VelocityField& u);

struct Concentrations {
  ScalarField c1;
  ScalarField c2;
};

/// Advances (c1, c2) by dt: upwind advection by u, then drift-diffusion in the
/// potential phi. Throws TimeStepTooLarge when dt exceeds stable_dt.
Concentrations np_step(const State& state, const ScalarField& phi, const VelocityField& u, const BoundaryData& bd,
                       const Params& params, double dt);

/// Largest |phi_right - phi_left| over interior faces and |W - phi| over the
/// half-cell wall faces.
double max_potential_jump(const ScalarField& phi, const BoundaryData& bd);

/// Largest dt keeping np_step positive:
///   advective  dt <= 0.5 min(hx / max|ux|, hy / max|uy|)
///   drift      dt <= 0.5 h^2 / (4 D (1 + max jump)),  h = min(hx, hy), D = max(D1, D2)
/// and never above dt_max.
double stable_dt(const State& state, const ScalarField& phi, const VelocityField& u, const BoundaryData& bd,
                 const Params& params, double dt_max);

}  // namespace nps
