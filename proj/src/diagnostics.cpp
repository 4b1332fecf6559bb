#include "nps/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nps/errors.hpp"

namespace nps {

DiagnosticsRecord make_record(const State& state, const SteadyState* reference) {
  DiagnosticsRecord r;
  r.t = state.t;
  r.l2_c1 = l2_norm(state.c1);
  r.l2_c2 = l2_norm(state.c2);
  r.l2_u = l2_norm_velocity(state.u);
  r.linf_c1 = linf_norm(state.c1);
  r.linf_c2 = linf_norm(state.c2);
  r.min_c = std::min(min_value(state.c1), min_value(state.c2));
  r.div_u = l2_norm(divergence(state.u));
  r.mass_c1 = integral(state.c1);
  r.mass_c2 = integral(state.c2);
  if (reference) {
    r.e_energy = energy(state, *reference);
    r.e_energy_sq = energy_squared(state, *reference);
  } else {
    r.e_energy = std::numeric_limits<double>::quiet_NaN();
    r.e_energy_sq = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

namespace {

struct EnergyParts {
  double c1_sq;
  double c2_sq;
  double u;
};

EnergyParts energy_parts(const State& state, const SteadyState& ref) {
  if (!(state.grid() == ref.grid())) throw InvalidSpec("energy: state and reference grids differ");
  const double a = l2_norm(state.c1 - ref.c1);
  const double b = l2_norm(state.c2 - ref.c2);
  return {a * a, b * b, l2_norm_velocity(state.u - ref.u)};
}

}  // namespace

double energy(const State& state, const SteadyState& ref) {
  const EnergyParts e = energy_parts(state, ref);
  return e.c1_sq + e.c2_sq + e.u;
}

double energy_squared(const State& state, const SteadyState& ref) {
  const EnergyParts e = energy_parts(state, ref);
  return e.c1_sq + e.c2_sq + e.u * e.u;
}

std::string_view to_string(BoundaryLabel label) {
  switch (label) {
    case BoundaryLabel::Equilibrium: return "Equilibrium";
    case BoundaryLabel::Nonequilibrium: return "Nonequilibrium";
    case BoundaryLabel::NonequilibriumNonzeroFlow: return "NonequilibriumNonzeroFlow";
  }
  return "?";
}

double gradient_linf(const ScalarField& f, const SideValues& boundary) {
  const Grid& g = f.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  auto at = [&](Side s, int k) { return boundary[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)]; };
  double m = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double gw = i > 0 ? (f(i, j) - f(i - 1, j)) / g.hx() : (f(i, j) - at(Side::Left, j)) / (0.5 * g.hx());
      const double ge =
          i < nx - 1 ? (f(i + 1, j) - f(i, j)) / g.hx() : (at(Side::Right, j) - f(i, j)) / (0.5 * g.hx());
      const double gs = j > 0 ? (f(i, j) - f(i, j - 1)) / g.hy() : (f(i, j) - at(Side::Bottom, i)) / (0.5 * g.hy());
      const double gn =
          j < ny - 1 ? (f(i, j + 1) - f(i, j)) / g.hy() : (at(Side::Top, i) - f(i, j)) / (0.5 * g.hy());
      m = std::max(m, std::hypot(0.5 * (gw + ge), 0.5 * (gs + gn)));
    }
  }
  return m;
}

BoundaryClassification classify_boundary(const BoundaryData& bd, double tol, double noise_floor) {
  if (!bd.all_dirichlet()) throw InvalidSpec("classify_boundary needs Dirichlet data on every side");
  bd.validate();
  BoundaryClassification out;
  const BoundaryTrace g1 = bd.gamma1_trace();
  const BoundaryTrace g2 = bd.gamma2_trace();
  const BoundaryTrace w = bd.w_trace();
  const std::size_t n = w.size();

  BoundaryTrace diff(n);
  for (std::size_t k = 0; k < n; ++k) diff[k] = g1[k] - g2[k];
  out.criterion_1 = boundary_tangential_integral(diff, w);
  out.criterion_2 = boundary_tangential_integral(w, diff);
  out.antisymmetry_defect = std::abs(out.criterion_1 + out.criterion_2);

  double magnitude = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t next = (k + 1) % n;
    magnitude += std::abs(diff[k] * w[next]) + std::abs(diff[next] * w[k]);
  }
  const double roundoff = 0.5 * magnitude * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
  out.criterion_threshold = std::max(10.0 * std::max(out.antisymmetry_defect, roundoff), noise_floor);

  double g1_max = 0.0, g2_max = 0.0;
  double mu1_lo = INFINITY, mu1_hi = -INFINITY, mu2_lo = INFINITY, mu2_hi = -INFINITY;
  for (std::size_t k = 0; k < n; ++k) {
    g1_max = std::max(g1_max, std::abs(g1[k]));
    g2_max = std::max(g2_max, std::abs(g2[k]));
    const double mu1 = std::log(g1[k]) + w[k];
    const double mu2 = std::log(g2[k]) - w[k];
    mu1_lo = std::min(mu1_lo, mu1);
    mu1_hi = std::max(mu1_hi, mu1);
    mu2_lo = std::min(mu2_lo, mu2);
    mu2_hi = std::max(mu2_hi, mu2);
  }
  out.mu1_span = mu1_hi - mu1_lo;
  out.mu2_span = mu2_hi - mu2_lo;
  out.a_gamma = std::max(g1_max, g2_max);
  out.a_gamma_sum = g1_max + g2_max;

  const ScalarField w_tilde = harmonic_extension(bd);
  out.grad_w_tilde_linf = gradient_linf(w_tilde, side_values(bd, &SideData::w));
  out.smallness = g1_max + g2_max + out.grad_w_tilde_linf;

  if (out.mu1_span <= tol && out.mu2_span <= tol) {
    out.label = BoundaryLabel::Equilibrium;
  } else if (std::max(std::abs(out.criterion_1), std::abs(out.criterion_2)) > out.criterion_threshold) {
    out.label = BoundaryLabel::NonequilibriumNonzeroFlow;
  } else {
    out.label = BoundaryLabel::Nonequilibrium;
  }
  return out;
}

DecayFit fit_decay_rate(std::span<const std::pair<double, double>> series, double trailing_decades) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [t, e] : series)
    if (e > 0.0 && std::isfinite(e)) pts.emplace_back(t, std::log(e));
  if (pts.size() < 10) throw InvalidSpec("fit_decay_rate: insufficient data (need 10 positive samples)");

  const double lo = pts.back().second + 2.0;
  double hi = pts.front().second - 1.0;
  if (trailing_decades > 0.0) hi = std::min(hi, lo + trailing_decades * std::log(10.0));
  std::size_t first = pts.size();
  for (std::size_t k = 0; k < pts.size(); ++k)
    if (pts[k].second <= hi) {
      first = k;
      break;
    }
  std::size_t last = first;
  for (std::size_t k = first; k < pts.size(); ++k)
    if (pts[k].second >= lo) last = k;
  if (first >= pts.size() || last < first + 2) {
    first = 0;
    last = pts.size() - 1;
  }

  const auto count = static_cast<double>(last - first + 1);
  double st = 0.0, sy = 0.0;
  for (std::size_t k = first; k <= last; ++k) {
    st += pts[k].first;
    sy += pts[k].second;
  }
  const double tm = st / count;
  const double ym = sy / count;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t k = first; k <= last; ++k) {
    const double dt = pts[k].first - tm;
    const double dy = pts[k].second - ym;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  DecayFit fit;
  fit.samples = static_cast<int>(count);
  fit.t_onset = pts[first].first;
  const double slope = stt > 0.0 ? sty / stt : 0.0;
  fit.rate = -slope;
  const double ss_res = std::max(0.0, syy - slope * sty);
  fit.rsq = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  const double span = pts[last].first - pts[first].first;
  fit.decaying = fit.rate > 0.0 && fit.rate * span > 1e-9;
  return fit;
}

std::optional<double> asymptotic_linf_monitor(std::span<const DiagnosticsRecord> history, double a_gamma,
                                              double alpha) {
  if (history.empty()) return std::nullopt;
  const double bound = a_gamma + alpha;
  std::size_t k = history.size();
  while (k > 0 && history[k - 1].linf_c1 + history[k - 1].linf_c2 <= bound) --k;
  if (k == history.size()) return std::nullopt;
  return history[k].t;
}

bool energy_non_increasing(std::span<const DiagnosticsRecord> history, double t_from, double noise) {
  double prev = INFINITY;
  for (const auto& r : history) {
    if (r.t < t_from) continue;
    if (r.e_energy > prev + noise) return false;
    prev = r.e_energy;
  }
  return true;
}

}  // namespace nps
