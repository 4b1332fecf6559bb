#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <tuple>

#include "nps/diagnostics.hpp"
#include "nps/errors.hpp"
#include "nps/nernst_planck.hpp"
#include "nps/scenario.hpp"
#include "nps/steady.hpp"

namespace py = pybind11;

namespace {

// Fields are returned as (ny, nx) arrays, row j holding y = (j + 1/2) h.
py::array_t<double> to_array(const nps::ScalarField& f) {
  const auto& g = f.grid();
  py::array_t<double> a({g.ny(), g.nx()});
  auto m = a.mutable_unchecked<2>();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) m(j, i) = f(i, j);
  return a;
}

nps::CommandOptions command_options(const std::string& out, std::optional<int> resolution,
                                     std::optional<double> tol, std::optional<double> t_end,
                                     std::optional<std::uint64_t> seed) {
  nps::CommandOptions o;
  o.out = out;
  o.resolution = resolution;
  o.tol = tol;
  o.t_end = t_end;
  o.seed = seed;
  return o;
}

using Command = nlohmann::json (*)(const nps::ScenarioConfig&, const nps::CommandOptions&);

std::string command(Command cmd, const std::string& config, const std::string& out, std::optional<int> resolution,
                    std::optional<double> tol, std::optional<double> t_end, std::optional<std::uint64_t> seed) {
  const auto cfg = nps::parse_config(config);
  nlohmann::json j;
  {
    py::gil_scoped_release release;
    j = cmd(cfg, command_options(out, resolution, tol, t_end, seed));
  }
  return j.dump();
}

}  // namespace

PYBIND11_MODULE(_nps, m) {
  m.doc() = "Nernst-Planck-Stokes solver core";

  // Translators run newest first, so the base class goes in first.
  py::register_exception<nps::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<nps::ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<nps::InvalidSpec>(m, "InvalidSpec", PyExc_ValueError);
  py::register_exception<nps::NonConvergence>(m, "NonConvergence", PyExc_RuntimeError);

  m.def("bernoulli", &nps::bernoulli, py::arg("x"));
  m.def("sg_edge_flux", &nps::sg_edge_flux, py::arg("c_left"), py::arg("c_right"), py::arg("dphi"), py::arg("d"),
        py::arg("h"), py::arg("z"));

  m.def("normalize_config", [](const std::string& config) {
    return nps::config_to_json(nps::parse_config(config)).dump();
  });

  using Entry = std::tuple<const char*, Command, const char*>;
  for (auto [name, cmd, doc] : {Entry{"run", &nps::cmd_run, "Time integration"},
                                Entry{"steady", &nps::cmd_steady, "Pseudo-time steady state"},
                                Entry{"pb", &nps::cmd_pb, "Poisson-Boltzmann state"},
                                Entry{"classify", &nps::cmd_classify, "Boundary classification"},
                                Entry{"sweep", &nps::cmd_sweep, "Amplitude sweep"}}) {
    m.def(
        name,
        [cmd](const std::string& config, const std::string& out, std::optional<int> resolution,
              std::optional<double> tol, std::optional<double> t_end, std::optional<std::uint64_t> seed) {
          return command(cmd, config, out, resolution, tol, t_end, seed);
        },
        doc, py::arg("config"), py::arg("out") = "", py::arg("resolution") = py::none(), py::arg("tol") = py::none(),
        py::arg("t_end") = py::none(), py::arg("seed") = py::none());
  }

  m.def(
      "steady_fields",
      [](const std::string& config) {
        const auto cfg = nps::parse_config(config);
        const nps::Grid grid(cfg.grid);
        const auto bd = nps::build_boundary(cfg, grid);
        nps::SteadyState s;
        {
          py::gil_scoped_release release;
          s = nps::solve_steady_nps(bd, cfg.params, nullptr, nps::steady_options(cfg));
        }
        py::dict d;
        d["c1"] = to_array(s.c1);
        d["c2"] = to_array(s.c2);
        d["phi"] = to_array(s.phi);
        d["p"] = to_array(s.p);
        d["u_linf"] = nps::linf_norm_velocity(s.u);
        d["residual"] = s.residual;
        d["t"] = s.t;
        return d;
      },
      "Steady state fields as (ny, nx) arrays", py::arg("config"));
}
