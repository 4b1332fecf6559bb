#include "nps/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "nps/errors.hpp"

namespace nps {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  return os;
}

void vtk_scalars(std::ostream& os, const char* name, const ScalarField& f) {
  os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double v : f.values()) os << format_double(v) << '\n';
}

}  // namespace

void write_vtk(std::ostream& os, const State& state, const std::string& title) {
  const Grid& g = state.grid();
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
  os << "DIMENSIONS " << g.nx() << ' ' << g.ny() << " 1\n";
  os << "ORIGIN " << format_double(0.5 * g.hx()) << ' ' << format_double(0.5 * g.hy()) << " 0\n";
  os << "SPACING " << format_double(g.hx()) << ' ' << format_double(g.hy()) << " 1\n";
  os << "POINT_DATA " << g.cells() << '\n';
  vtk_scalars(os, "c1", state.c1);
  vtk_scalars(os, "c2", state.c2);
  vtk_scalars(os, "phi", state.phi);
  vtk_scalars(os, "p", state.p);
  os << "VECTORS u double\n";
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      os << format_double(0.5 * (state.u.ux(i, j) + state.u.ux(i + 1, j))) << ' '
         << format_double(0.5 * (state.u.uy(i, j) + state.u.uy(i, j + 1))) << " 0\n";
}

void write_vtk(const std::filesystem::path& path, const State& state, const std::string& title) {
  auto os = open_out(path);
  write_vtk(os, state, title);
}

void write_field_csv(std::ostream& os, const ScalarField& f) {
  const Grid& g = f.grid();
  os << "x,y,value\n";
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      os << format_double(g.xc(i)) << ',' << format_double(g.yc(j)) << ',' << format_double(f(i, j)) << '\n';
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& f) {
  auto os = open_out(path);
  write_field_csv(os, f);
}

void write_diagnostics_header(std::ostream& os) {
  os << "t,e_energy,l2_c1,l2_c2,l2_u,linf_c1,linf_c2,min_c,div_u,mass_c1,mass_c2\n";
}

void write_diagnostics_row(std::ostream& os, const DiagnosticsRecord& r) {
  for (double v : {r.t, r.e_energy, r.l2_c1, r.l2_c2, r.l2_u, r.linf_c1, r.linf_c2, r.min_c, r.div_u, r.mass_c1})
    os << format_double(v) << ',';
  os << format_double(r.mass_c2) << '\n';
}

void write_diagnostics_csv(const std::filesystem::path& path, std::span<const DiagnosticsRecord> history) {
  auto os = open_out(path);
  write_diagnostics_header(os);
  for (const auto& r : history) write_diagnostics_row(os, r);
}

void write_energy_variants_csv(const std::filesystem::path& path, std::span<const DiagnosticsRecord> history) {
  auto os = open_out(path);
  os << "t,e_energy,e_energy_squared_velocity\n";
  for (const auto& r : history)
    os << format_double(r.t) << ',' << format_double(r.e_energy) << ',' << format_double(r.e_energy_sq) << '\n';
}

nlohmann::json state_to_json(const State& state) {
  const Grid& g = state.grid();
  auto vec = [](std::span<const double> v) { return std::vector<double>(v.begin(), v.end()); };
  return nlohmann::json{
      {"format", "nps-checkpoint"},
      {"version", 1},
      {"grid", {{"nx", g.nx()}, {"ny", g.ny()}, {"lx", g.lx()}, {"ly", g.ly()}}},
      {"t", state.t},
      {"steps", state.steps},
      {"c1", vec(state.c1.values())},
      {"c2", vec(state.c2.values())},
      {"phi", vec(state.phi.values())},
      {"p", vec(state.p.values())},
      {"ux", vec(state.u.ux_values())},
      {"uy", vec(state.u.uy_values())},
  };
}

namespace {

void fill(std::span<double> dst, const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) throw ParseError("missing array", 0, key);
  const auto& a = j[key];
  if (a.size() != dst.size())
    throw ParseError("expected " + std::to_string(dst.size()) + " values, got " + std::to_string(a.size()), 0, key);
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = a[k].get<double>();
}

}  // namespace

State state_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "nps-checkpoint") throw ParseError("not a checkpoint document", 0, "format");
    const auto& gj = j.at("grid");
    const Grid g(GridSpec{gj.at("nx").get<int>(), gj.at("ny").get<int>(), gj.at("lx").get<double>(),
                          gj.at("ly").get<double>()});
    State s = State::at_rest(g);
    s.t = j.at("t").get<double>();
    s.steps = j.at("steps").get<std::int64_t>();
    fill(s.c1.values(), j, "c1");
    fill(s.c2.values(), j, "c2");
    fill(s.phi.values(), j, "phi");
    fill(s.p.values(), j, "p");
    fill(s.u.ux_values(), j, "ux");
    fill(s.u.uy_values(), j, "uy");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what(), 0, "checkpoint");
  }
}

void save_checkpoint(const std::filesystem::path& path, const State& state) {
  write_json(path, state_to_json(state));
}

State load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), 0, path.string());
  }
  return state_from_json(j);
}

nlohmann::json to_json(const BoundaryClassification& c) {
  return nlohmann::json{
      {"label", std::string(to_string(c.label))},
      {"a_gamma", c.a_gamma},
      {"a_gamma_sum", c.a_gamma_sum},
      {"grad_w_tilde_linf", c.grad_w_tilde_linf},
      {"smallness", c.smallness},
      {"criterion_1", c.criterion_1},
      {"criterion_2", c.criterion_2},
      {"antisymmetry_defect", c.antisymmetry_defect},
      {"criterion_threshold", c.criterion_threshold},
      {"mu1_span", c.mu1_span},
      {"mu2_span", c.mu2_span},
  };
}

nlohmann::json to_json(const DiagnosticsRecord& r) {
  return nlohmann::json{
      {"t", r.t},           {"e_energy", r.e_energy}, {"e_energy_squared_velocity", r.e_energy_sq},
      {"l2_c1", r.l2_c1},   {"l2_c2", r.l2_c2},       {"l2_u", r.l2_u},
      {"linf_c1", r.linf_c1}, {"linf_c2", r.linf_c2}, {"min_c", r.min_c},
      {"div_u", r.div_u},   {"mass_c1", r.mass_c1},   {"mass_c2", r.mass_c2},
  };
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

}  // namespace nps
