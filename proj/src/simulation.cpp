#include "nps/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nps/nernst_planck.hpp"
#include "nps/stokes.hpp"

namespace nps {

namespace {

ScalarField potential_for(const ScalarField& c1, const ScalarField& c2, const BoundaryData& bd,
                          const Params& params, double tol, const ScalarField* warm) {
  EllipticOptions opts;
  opts.tol = tol;
  return solve_potential(c1 - c2, bd, params, opts, warm).solution;
}

}  // namespace

State step(const State& state, const BoundaryData& bd, const Params& params, const StepOptions& opts) {
  try {
    const ScalarField phi = potential_for(state.c1, state.c2, bd, params, opts.elliptic_tol, &state.phi);
    const double dt = std::min(stable_dt(state, phi, state.u, bd, params, opts.dt_max),
                               0.8 * viscous_dt_limit(state.grid(), params));

    Concentrations c = np_step(state, phi, state.u, bd, params, dt);
    const VelocityField force = electric_force(state.c1, state.c2, phi, params);
    StokesStepResult flow = stokes_step(state.u, force, params, dt, opts.elliptic_tol);

    State next;
    next.t = state.t + dt;
    next.steps = state.steps + 1;
    next.phi = potential_for(c.c1, c.c2, bd, params, opts.elliptic_tol, &phi);
    next.c1 = std::move(c.c1);
    next.c2 = std::move(c.c2);
    next.u = std::move(flow.u);
    next.p = std::move(flow.p);
    return next;
  } catch (const NonConvergence& e) {
    throw NonConvergence("step " + std::to_string(state.steps + 1) + " from t = " + std::to_string(state.t) +
                         ": " + e.what());
  }
}

State make_initial_state(const BoundaryData& bd, const Params& params, const InitialCondition& ic,
                         double elliptic_tol) {
  const Grid& g = bd.grid();
  bd.validate();
  State s = State::at_rest(g);
  std::mt19937_64 rng(ic.seed);

  switch (ic.kind) {
    case InitKind::Laplace: {
      auto extend = [&](std::vector<double> SideData::*member) {
        ScalarField c = laplace_extension(g, side_values(bd, member), elliptic_tol);
        const BoundaryTrace trace = member == &SideData::gamma1 ? bd.gamma1_trace() : bd.gamma2_trace();
        const double floor = 0.5 * *std::min_element(trace.begin(), trace.end());
        for (double& v : c.values()) v = std::max(v, floor);
        return c;
      };
      s.c1 = extend(&SideData::gamma1);
      s.c2 = extend(&SideData::gamma2);
      break;
    }
    case InitKind::Uniform:
      s.c1 = ScalarField(g, ic.level);
      s.c2 = ScalarField(g, ic.level);
      break;
    case InitKind::Random: {
      std::uniform_real_distribution<double> dist(0.2, 1.8);
      for (double& v : s.c1.values()) v = ic.level * dist(rng);
      for (double& v : s.c2.values()) v = ic.level * dist(rng);
      break;
    }
  }
  if (ic.linf_target > 0.0) {
    s.c1 *= ic.linf_target / linf_norm(s.c1);
    s.c2 *= ic.linf_target / linf_norm(s.c2);
  }
  if (ic.velocity_amplitude != 0.0) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    VelocityField u(g);
    for (double& v : u.ux_values()) v = ic.velocity_amplitude * dist(rng);
    for (double& v : u.uy_values()) v = ic.velocity_amplitude * dist(rng);
    u.apply_boundary();
    s.u = solve_pressure_projection(u, 1.0, elliptic_tol).u;
  }
  s.phi = potential_for(s.c1, s.c2, bd, params, elliptic_tol, nullptr);
  return s;
}

RunResult run(const State& init, const BoundaryData& bd, const Params& params, const SteadyState* ref,
              const RunOptions& opts) {
  if (opts.t_end < init.t) throw InvalidSpec("run needs t_end >= the initial time");
  const int cadence = std::max(1, opts.cadence);
  std::vector<double> snaps;
  for (double t : opts.snapshot_times)
    if (t > init.t && t <= opts.t_end) snaps.push_back(t);
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;

  RunResult out;
  out.state = init;
  auto record = [&] {
    out.history.push_back(make_record(out.state, ref));
    if (opts.sink) opts.sink(out.history.back());
  };
  record();

  const double t_slack = 1e-12 * std::max(1.0, std::abs(opts.t_end));
  std::int64_t taken = 0;
  try {
    while (opts.t_end - out.state.t > t_slack) {
      if (opts.max_steps > 0 && taken >= opts.max_steps) break;
      StepOptions so = opts.step;
      double target = opts.t_end;
      if (next_snap < snaps.size()) target = std::min(target, snaps[next_snap]);
      so.dt_max = std::min(so.dt_max, target - out.state.t);
      out.state = step(out.state, bd, params, so);
      ++taken;
      const bool last = opts.t_end - out.state.t <= t_slack;
      if (last) out.state.t = opts.t_end;
      while (next_snap < snaps.size() && snaps[next_snap] - out.state.t <= t_slack) {
        out.state.t = std::max(out.state.t, snaps[next_snap]);
        if (opts.on_snapshot) opts.on_snapshot(out.state);
        ++next_snap;
      }
      if (taken % cadence == 0 || last) record();
    }
  } catch (const NonConvergence& e) {
    throw RunError(e.what(), std::move(out), true);
  } catch (const Error& e) {
    throw RunError(e.what(), std::move(out), false);
  }
  if (out.history.back().t != out.state.t) record();
  return out;
}

}  // namespace nps
