#include "nps/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nps/errors.hpp"

namespace nps {

std::string_view to_string(Side side) {
  switch (side) {
    case Side::Bottom: return "bottom";
    case Side::Right: return "right";
    case Side::Top: return "top";
    case Side::Left: return "left";
  }
  return "?";
}

std::string_view to_string(BoundaryMode mode) {
  return mode == BoundaryMode::Dirichlet ? "dirichlet" : "blocking";
}

Grid::Grid(const GridSpec& spec, bool periodic) : spec_(spec), periodic_(periodic) {
  if (spec.nx < 4 || spec.ny < 4) {
    throw InvalidSpec("grid needs nx >= 4 and ny >= 4, got " + std::to_string(spec.nx) + "x" +
                      std::to_string(spec.ny));
  }
  if (!(spec.lx > 0.0) || !(spec.ly > 0.0) || !std::isfinite(spec.lx) || !std::isfinite(spec.ly)) {
    throw InvalidSpec("grid lengths must be finite and positive");
  }
  hx_ = spec.lx / spec.nx;
  hy_ = spec.ly / spec.ny;
}

Grid build_grid(const GridSpec& spec) { return Grid(spec); }

int Grid::side_faces(Side side) const {
  return (side == Side::Bottom || side == Side::Top) ? spec_.nx : spec_.ny;
}

double Grid::side_length(Side side) const {
  return (side == Side::Bottom || side == Side::Top) ? spec_.lx : spec_.ly;
}

double Grid::side_h(Side side) const { return (side == Side::Bottom || side == Side::Top) ? hx_ : hy_; }

BoundaryFace Grid::boundary_face(Side side, int k) const {
  switch (side) {
    case Side::Bottom: return {side, k, xc(k), 0.0, xc(k)};
    case Side::Right: return {side, k, spec_.lx, yc(k), yc(k)};
    case Side::Top: return {side, k, xc(k), spec_.ly, spec_.lx - xc(k)};
    case Side::Left: return {side, k, 0.0, yc(k), spec_.ly - yc(k)};
  }
  return {};
}

std::vector<BoundaryFace> Grid::boundary_faces() const {
  std::vector<BoundaryFace> out;
  out.reserve(static_cast<std::size_t>(boundary_face_count()));
  for (int i = 0; i < spec_.nx; ++i) out.push_back(boundary_face(Side::Bottom, i));
  for (int j = 0; j < spec_.ny; ++j) out.push_back(boundary_face(Side::Right, j));
  for (int i = spec_.nx - 1; i >= 0; --i) out.push_back(boundary_face(Side::Top, i));
  for (int j = spec_.ny - 1; j >= 0; --j) out.push_back(boundary_face(Side::Left, j));
  return out;
}

ScalarField ScalarField::sample(const Grid& grid, const std::function<double(double, double)>& f) {
  ScalarField out(grid);
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) out(i, j) = f(grid.xc(i), grid.yc(j));
  return out;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
  return *this;
}

ScalarField& ScalarField::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

VelocityField VelocityField::sample(const Grid& grid, const std::function<double(double, double)>& fx,
                                    const std::function<double(double, double)>& fy) {
  VelocityField out(grid);
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i <= grid.nx(); ++i) out.ux(i, j) = fx(grid.xf(i), grid.yc(j));
  for (int j = 0; j <= grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) out.uy(i, j) = fy(grid.xc(i), grid.yf(j));
  return out;
}

void VelocityField::apply_boundary() {
  const int nx = grid_.nx();
  const int ny = grid_.ny();
  if (grid_.periodic()) {
    for (int j = 0; j < ny; ++j) ux(nx, j) = ux(0, j);
    for (int i = 0; i < nx; ++i) uy(i, ny) = uy(i, 0);
    return;
  }
  for (int j = 0; j < ny; ++j) {
    ux(0, j) = 0.0;
    ux(nx, j) = 0.0;
  }
  for (int i = 0; i < nx; ++i) {
    uy(i, 0) = 0.0;
    uy(i, ny) = 0.0;
  }
}

VelocityField& VelocityField::operator+=(const VelocityField& o) {
  for (std::size_t k = 0; k < ux_.size(); ++k) ux_[k] += o.ux_[k];
  for (std::size_t k = 0; k < uy_.size(); ++k) uy_[k] += o.uy_[k];
  return *this;
}

VelocityField& VelocityField::operator-=(const VelocityField& o) {
  for (std::size_t k = 0; k < ux_.size(); ++k) ux_[k] -= o.ux_[k];
  for (std::size_t k = 0; k < uy_.size(); ++k) uy_[k] -= o.uy_[k];
  return *this;
}

VelocityField& VelocityField::operator*=(double a) {
  for (double& v : ux_) v *= a;
  for (double& v : uy_) v *= a;
  return *this;
}

BoundaryData::BoundaryData(const Grid& grid) : grid_(grid) {
  for (Side s : kSides) {
    const auto n = static_cast<std::size_t>(grid.side_faces(s));
    auto& d = side(s);
    d.gamma1.assign(n, 1.0);
    d.gamma2.assign(n, 1.0);
    d.w.assign(n, 0.0);
  }
}

BoundaryData BoundaryData::uniform(const Grid& grid, double gamma1, double gamma2, double w) {
  return from_functions(
      grid, [=](const BoundaryFace&) { return gamma1; }, [=](const BoundaryFace&) { return gamma2; },
      [=](const BoundaryFace&) { return w; });
}

BoundaryData BoundaryData::from_functions(const Grid& grid,
                                          const std::function<double(const BoundaryFace&)>& gamma1,
                                          const std::function<double(const BoundaryFace&)>& gamma2,
                                          const std::function<double(const BoundaryFace&)>& w) {
  BoundaryData bd(grid);
  for (Side s : kSides) {
    auto& d = bd.side(s);
    for (int k = 0; k < grid.side_faces(s); ++k) {
      const BoundaryFace face = grid.boundary_face(s, k);
      d.gamma1[static_cast<std::size_t>(k)] = gamma1(face);
      d.gamma2[static_cast<std::size_t>(k)] = gamma2(face);
      d.w[static_cast<std::size_t>(k)] = w(face);
    }
  }
  return bd;
}

void BoundaryData::set_mode(BoundaryMode mode) {
  for (auto& d : sides_) d.mode = mode;
}

bool BoundaryData::all_dirichlet() const {
  return std::all_of(sides_.begin(), sides_.end(), [](const SideData& d) { return d.mode == BoundaryMode::Dirichlet; });
}

bool BoundaryData::all_blocking() const {
  return std::all_of(sides_.begin(), sides_.end(), [](const SideData& d) { return d.mode == BoundaryMode::Blocking; });
}

BoundaryTrace BoundaryData::loop(std::vector<double> SideData::*member) const {
  BoundaryTrace out;
  out.reserve(static_cast<std::size_t>(grid_.boundary_face_count()));
  const auto& bottom = side(Side::Bottom).*member;
  const auto& right = side(Side::Right).*member;
  const auto& top = side(Side::Top).*member;
  const auto& left = side(Side::Left).*member;
  out.insert(out.end(), bottom.begin(), bottom.end());
  out.insert(out.end(), right.begin(), right.end());
  out.insert(out.end(), top.rbegin(), top.rend());
  out.insert(out.end(), left.rbegin(), left.rend());
  return out;
}

BoundaryTrace BoundaryData::gamma1_trace() const { return loop(&SideData::gamma1); }
BoundaryTrace BoundaryData::gamma2_trace() const { return loop(&SideData::gamma2); }
BoundaryTrace BoundaryData::w_trace() const { return loop(&SideData::w); }

void BoundaryData::validate() const {
  std::vector<std::string> errors;
  for (Side s : kSides) {
    const auto& d = side(s);
    const auto n = static_cast<std::size_t>(grid_.side_faces(s));
    const std::string name(to_string(s));
    if (d.gamma1.size() != n || d.gamma2.size() != n || d.w.size() != n) {
      errors.push_back(name + ": sample count does not match " + std::to_string(n) + " faces");
      continue;
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(d.gamma1[k]) || !std::isfinite(d.gamma2[k]) || !std::isfinite(d.w[k])) {
        errors.push_back(name + "[" + std::to_string(k) + "]: non-finite boundary sample");
        continue;
      }
      if (d.mode != BoundaryMode::Dirichlet) continue;
      if (d.gamma1[k] <= 0.0)
        errors.push_back(name + "[" + std::to_string(k) + "]: gamma1 = " + std::to_string(d.gamma1[k]) +
                         " violates positivity (gamma_i > 0)");
      if (d.gamma2[k] <= 0.0)
        errors.push_back(name + "[" + std::to_string(k) + "]: gamma2 = " + std::to_string(d.gamma2[k]) +
                         " violates positivity (gamma_i > 0)");
    }
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

void Params::validate() const {
  std::vector<std::string> bad;
  if (!(d1 > 0.0)) bad.emplace_back("d1");
  if (!(d2 > 0.0)) bad.emplace_back("d2");
  if (!(eps > 0.0)) bad.emplace_back("eps");
  if (!(nu > 0.0)) bad.emplace_back("nu");
  if (!(kc > 0.0)) bad.emplace_back("kc");
  if (!bad.empty()) {
    std::string msg = "parameters must be strictly positive:";
    for (const auto& b : bad) msg += " " + b;
    throw InvalidSpec(msg);
  }
}

double l2_norm(const ScalarField& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v * v;
  return std::sqrt(sum * f.grid().cell_area());
}

double linf_norm(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double integral(const ScalarField& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return sum * f.grid().cell_area();
}

double mean(const ScalarField& f) { return integral(f) / (f.grid().lx() * f.grid().ly()); }

double min_value(const ScalarField& f) {
  double m = f.values().empty() ? 0.0 : f.values()[0];
  for (double v : f.values()) m = std::min(m, v);
  return m;
}

double l2_norm_velocity(const VelocityField& u) {
  const Grid& g = u.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  double sum = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const double w = (i == 0 || i == nx) ? 0.5 : 1.0;
      sum += w * u.ux(i, j) * u.ux(i, j);
    }
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double w = (j == 0 || j == ny) ? 0.5 : 1.0;
      sum += w * u.uy(i, j) * u.uy(i, j);
    }
  return std::sqrt(sum * g.cell_area());
}

double linf_norm_velocity(const VelocityField& u) {
  double m = 0.0;
  for (double v : u.ux_values()) m = std::max(m, std::abs(v));
  for (double v : u.uy_values()) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(const ScalarField& f) {
  return std::all_of(f.values().begin(), f.values().end(), [](double v) { return std::isfinite(v); });
}

bool all_finite(const VelocityField& u) {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(u.ux_values().begin(), u.ux_values().end(), finite) &&
         std::all_of(u.uy_values().begin(), u.uy_values().end(), finite);
}

double boundary_tangential_integral(std::span<const double> f, std::span<const double> g) {
  if (f.size() != g.size()) throw InvalidSpec("boundary traces differ in length");
  const std::size_t n = f.size();
  if (n < 3) return 0.0;
  // Centered derivative times the dual (trapezoid) arc weight collapses to half
  // the centered difference, independent of the local spacing:
  //   sum_k f_k (g_{k+1} - g_{k-1}) / 2 = sum_k (f_k g_{k+1} - f_{k+1} g_k) / 2.
  // The edge form is bitwise antisymmetric under f <-> g.
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t next = (k + 1) % n;
    sum += f[k] * g[next] - f[next] * g[k];
  }
  return 0.5 * sum;
}

}  // namespace nps
