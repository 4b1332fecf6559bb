#pragma once

// Scalar quantities tracked by runs and reported by the CLI: per-step norms,
// the Lyapunov-type energy against a steady reference, the boundary
// classification (bounds, flow criterion, equilibrium test) and decay fits.

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "nps/elliptic.hpp"
#include "nps/state.hpp"

namespace nps {

struct DiagnosticsRecord {
  double t = 0.0;
  /// ||c1 - c1*||^2 + ||c2 - c2*||^2 + ||u - u*||, velocity term unsquared.
  /// NaN when no reference is attached.
  double e_energy = 0.0;
  /// Same with the velocity term squared.
  double e_energy_sq = 0.0;
  double l2_c1 = 0.0;
  double l2_c2 = 0.0;
  double l2_u = 0.0;
  double linf_c1 = 0.0;
  double linf_c2 = 0.0;
  double min_c = 0.0;
  double div_u = 0.0;
  double mass_c1 = 0.0;
  double mass_c2 = 0.0;
};

DiagnosticsRecord make_record(const State& state, const SteadyState* reference = nullptr);

double energy(const State& state, const SteadyState& ref);
double energy_squared(const State& state, const SteadyState& ref);

enum class BoundaryLabel { Equilibrium, Nonequilibrium, NonequilibriumNonzeroFlow };

std::string_view to_string(BoundaryLabel label);

struct BoundaryClassification {
  double a_gamma = 0.0;      // max(||gamma1||_inf, ||gamma2||_inf)
  double a_gamma_sum = 0.0;  // ||gamma1||_inf + ||gamma2||_inf
  double grad_w_tilde_linf = 0.0;
  double smallness = 0.0;    // ||gamma1||_inf + ||gamma2||_inf + ||grad W~||_inf
  double criterion_1 = 0.0;  // loop integral of (gamma1 - gamma2) d_tau W
  double criterion_2 = 0.0;  // loop integral of W d_tau (gamma1 - gamma2)
  double antisymmetry_defect = 0.0;
  double criterion_threshold = 0.0;
  double mu1_span = 0.0;
  double mu2_span = 0.0;
  BoundaryLabel label = BoundaryLabel::Equilibrium;
};

/// Classifies Dirichlet boundary data. Equilibrium (both electrochemical
/// potential spans <= tol) takes precedence over the flow criterion. The flow
/// label needs max(|criterion_1|, |criterion_2|) above ten times the
/// round-off bound of the loop sum, or above noise_floor when that is larger.
BoundaryClassification classify_boundary(const BoundaryData& bd, double tol, double noise_floor = 0.0);

/// Largest cell-centered gradient magnitude of f; wall faces use the half-cell
/// difference to the Dirichlet trace.
double gradient_linf(const ScalarField& f, const SideValues& boundary);

struct DecayFit {
  double rate = 0.0;     // r in e(t) ~ e(t0) exp(-r (t - t0))
  double t_onset = 0.0;  // first sample of the fitted window
  double rsq = 0.0;
  bool decaying = false;
  int samples = 0;
};

/// Least-squares fit of log e against t over the samples whose log lies in
/// [log(e_final) + 2, log(e_initial) - 1]; falls back to every positive sample
/// when that band holds fewer than three. A positive trailing_decades caps the
/// band at that many powers of ten above its floor, which isolates the
/// asymptotic rate from faster early transients. Throws InvalidSpec with fewer
/// than ten positive samples.
DecayFit fit_decay_rate(std::span<const std::pair<double, double>> series, double trailing_decades = 0.0);

/// First record time after which linf_c1 + linf_c2 <= a_gamma + alpha holds for
/// every later record; nullopt when the last record violates it.
std::optional<double> asymptotic_linf_monitor(std::span<const DiagnosticsRecord> history, double a_gamma,
                                              double alpha);

/// Whether e(t) never rises by more than noise after t_from.
bool energy_non_increasing(std::span<const DiagnosticsRecord> history, double t_from, double noise = 1e-10);

}  // namespace nps
