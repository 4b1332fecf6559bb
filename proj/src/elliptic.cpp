#include "nps/elliptic.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "nps/grid.hpp"

namespace nps {

namespace {

// Eigenpairs of the 1D homogeneous second-difference matrix -T (unscaled).
struct AxisBasis {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
};

std::shared_ptr<const AxisBasis> axis_basis(int n, AxisBc bc) {
  static std::mutex mutex;
  static std::map<std::pair<int, AxisBc>, std::shared_ptr<const AxisBasis>> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(n, bc);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    t(k, k) = 2.0;
    if (k > 0) t(k, k - 1) = -1.0;
    if (k + 1 < n) t(k, k + 1) = -1.0;
  }
  switch (bc) {
    case AxisBc::Dirichlet:
      t(0, 0) = 3.0;
      t(n - 1, n - 1) = 3.0;
      break;
    case AxisBc::Neumann:
      t(0, 0) = 1.0;
      t(n - 1, n - 1) = 1.0;
      break;
    case AxisBc::Periodic:
      t(0, n - 1) = -1.0;
      t(n - 1, 0) = -1.0;
      break;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
  auto basis = std::make_shared<AxisBasis>();
  basis->vectors = eig.eigenvectors();
  basis->values = eig.eigenvalues();
  for (int k = 0; k < n; ++k)
    if (std::abs(basis->values(k)) < 1e-12) basis->values(k) = 0.0;
  cache.emplace(key, basis);
  return basis;
}

class SpectralInverse {
 public:
  SpectralInverse(const Grid& g, AxisBc bc, double scale, double shift)
      : nx_(g.nx()), ny_(g.ny()), bx_(axis_basis(g.nx(), bc)), by_(axis_basis(g.ny(), bc)), inv_(g.nx(), g.ny()) {
    const double ax = scale / (g.hx() * g.hx());
    const double ay = scale / (g.hy() * g.hy());
    for (int l = 0; l < ny_; ++l)
      for (int k = 0; k < nx_; ++k) {
        const double d = ax * bx_->values(k) + ay * by_->values(l) + shift;
        inv_(k, l) = std::abs(d) > 1e-12 * (ax + ay) ? 1.0 / d : 0.0;
      }
  }

  void apply(std::span<const double> r, std::span<double> z) const {
    Eigen::Map<const Eigen::MatrixXd> rm(r.data(), nx_, ny_);
    Eigen::Map<Eigen::MatrixXd> zm(z.data(), nx_, ny_);
    Eigen::MatrixXd hat = bx_->vectors.transpose() * rm * by_->vectors;
    hat.array() *= inv_.array();
    zm.noalias() = bx_->vectors * hat * by_->vectors.transpose();
  }

 private:
  int nx_;
  int ny_;
  std::shared_ptr<const AxisBasis> bx_;
  std::shared_ptr<const AxisBasis> by_;
  Eigen::MatrixXd inv_;
};

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

void remove_mean(std::span<double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  s /= static_cast<double>(v.size());
  for (double& x : v) x -= s;
}

double operator_diagonal(const Grid& g, AxisBc bc, double scale, int i, int j) {
  const double ix = 1.0 / (g.hx() * g.hx());
  const double iy = 1.0 / (g.hy() * g.hy());
  double d = 2.0 * ix + 2.0 * iy;
  const bool west = i == 0, east = i == g.nx() - 1, south = j == 0, north = j == g.ny() - 1;
  if (bc == AxisBc::Dirichlet) {
    d += (west ? ix : 0.0) + (east ? ix : 0.0) + (south ? iy : 0.0) + (north ? iy : 0.0);
  } else if (bc == AxisBc::Neumann) {
    d -= (west ? ix : 0.0) + (east ? ix : 0.0) + (south ? iy : 0.0) + (north ? iy : 0.0);
  }
  return scale * d;
}

}  // namespace

SideValues side_values(const BoundaryData& bd, std::vector<double> SideData::*member) {
  SideValues out;
  for (Side s : kSides) out[static_cast<std::size_t>(s)] = bd.side(s).*member;
  return out;
}

ScalarField apply_operator(const ScalarField& f, AxisBc bc, double scale, std::span<const double> diag) {
  const Grid& g = f.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  const double ix = scale / (g.hx() * g.hx());
  const double iy = scale / (g.hy() * g.hy());
  ScalarField out(g);
  auto ghost = [bc](double own, double wrapped) {
    switch (bc) {
      case AxisBc::Dirichlet: return -own;
      case AxisBc::Neumann: return own;
      case AxisBc::Periodic: return wrapped;
    }
    return own;
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double c = f(i, j);
      const double w = i > 0 ? f(i - 1, j) : ghost(c, f(nx - 1, j));
      const double e = i < nx - 1 ? f(i + 1, j) : ghost(c, f(0, j));
      const double s = j > 0 ? f(i, j - 1) : ghost(c, f(i, ny - 1));
      const double n = j < ny - 1 ? f(i, j + 1) : ghost(c, f(i, 0));
      double v = ix * (2.0 * c - w - e) + iy * (2.0 * c - s - n);
      if (!diag.empty()) v += diag[f.index(i, j)] * c;
      out(i, j) = v;
    }
  }
  return out;
}

EllipticResult solve_linear(const ScalarField& rhs, AxisBc bc, double scale, std::span<const double> diag,
                            const EllipticOptions& opts, const ScalarField* initial) {
  const Grid& g = rhs.grid();
  const std::size_t n = rhs.size();
  const double weight = g.cell_area();
  const int max_it = opts.max_iterations > 0 ? opts.max_iterations : 10 * g.cells();

  bool has_diag = false;
  double diag_mean = 0.0;
  for (double d : diag) {
    has_diag = has_diag || d != 0.0;
    diag_mean += d;
  }
  if (!diag.empty()) diag_mean /= static_cast<double>(diag.size());
  const bool singular = bc != AxisBc::Dirichlet && !has_diag;

  std::vector<double> b(rhs.values().begin(), rhs.values().end());
  if (singular) remove_mean(b);

  ScalarField x = initial ? *initial : ScalarField(g);
  if (singular) remove_mean(x.values());

  std::vector<double> inv_diag;
  std::unique_ptr<SpectralInverse> spectral;
  if (opts.preconditioner == Preconditioner::Spectral) {
    spectral = std::make_unique<SpectralInverse>(g, bc, scale, diag_mean);
  } else {
    inv_diag.resize(n);
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t k = rhs.index(i, j);
        inv_diag[k] = 1.0 / (operator_diagonal(g, bc, scale, i, j) + (diag.empty() ? 0.0 : diag[k]));
      }
  }
  auto precondition = [&](std::span<const double> r, std::span<double> z) {
    if (spectral) {
      spectral->apply(r, z);
    } else {
      for (std::size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
    }
    if (singular) remove_mean(z);
  };

  auto true_residual = [&](std::vector<double>& r) {
    ScalarField ax = apply_operator(x, bc, scale, diag);
    for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - ax.values()[k];
    if (singular) remove_mean(r);
  };

  std::vector<double> r(n), z(n), p(n), q(n);
  EllipticSolveReport report;
  true_residual(r);
  report.residual_l2 = std::sqrt(dot(r, r) * weight);

  for (int restart = 0; restart < 3 && report.residual_l2 > opts.tol; ++restart) {
    precondition(r, z);
    p = z;
    double rz = dot(r, z);
    while (report.iterations < max_it) {
      ScalarField pf(g);
      std::copy(p.begin(), p.end(), pf.values().begin());
      ScalarField ap = apply_operator(pf, bc, scale, diag);
      std::copy(ap.values().begin(), ap.values().end(), q.begin());
      const double pq = dot(p, q);
      if (!(pq > 0.0)) break;
      const double alpha = rz / pq;
      auto xv = x.values();
      for (std::size_t k = 0; k < n; ++k) {
        xv[k] += alpha * p[k];
        r[k] -= alpha * q[k];
      }
      ++report.iterations;
      report.residual_l2 = std::sqrt(dot(r, r) * weight);
      if (report.residual_l2 <= opts.tol) break;
      precondition(r, z);
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    // The recurrence drifts from the true residual; confirm before accepting.
    if (singular) remove_mean(x.values());
    true_residual(r);
    report.residual_l2 = std::sqrt(dot(r, r) * weight);
    if (report.iterations >= max_it) break;
  }

  report.converged = report.residual_l2 <= opts.tol;
  if (!report.converged) {
    throw EllipticNonConvergence("conjugate gradient stopped at residual " + std::to_string(report.residual_l2) +
                                     " after " + std::to_string(report.iterations) + " iterations",
                                 report);
  }
  return {std::move(x), report};
}

namespace {

ScalarField dirichlet_rhs(const ScalarField& rhs, const SideValues& boundary, double scale) {
  const Grid& g = rhs.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  const double ix = 2.0 * scale / (g.hx() * g.hx());
  const double iy = 2.0 * scale / (g.hy() * g.hy());
  ScalarField b = rhs;
  const auto& bottom = boundary[static_cast<std::size_t>(Side::Bottom)];
  const auto& top = boundary[static_cast<std::size_t>(Side::Top)];
  const auto& left = boundary[static_cast<std::size_t>(Side::Left)];
  const auto& right = boundary[static_cast<std::size_t>(Side::Right)];
  for (int i = 0; i < nx; ++i) {
    b(i, 0) += iy * bottom[static_cast<std::size_t>(i)];
    b(i, ny - 1) += iy * top[static_cast<std::size_t>(i)];
  }
  for (int j = 0; j < ny; ++j) {
    b(0, j) += ix * left[static_cast<std::size_t>(j)];
    b(nx - 1, j) += ix * right[static_cast<std::size_t>(j)];
  }
  return b;
}

}  // namespace

EllipticResult solve_dirichlet(const ScalarField& rhs, const SideValues& boundary, double scale,
                               std::span<const double> diag, const EllipticOptions& opts,
                               const ScalarField* initial) {
  return solve_linear(dirichlet_rhs(rhs, boundary, scale), AxisBc::Dirichlet, scale, diag, opts, initial);
}

ScalarField dirichlet_residual(const ScalarField& x, const ScalarField& rhs, const SideValues& boundary,
                               double scale, std::span<const double> diag) {
  ScalarField r = dirichlet_rhs(rhs, boundary, scale);
  r -= apply_operator(x, AxisBc::Dirichlet, scale, diag);
  return r;
}

EllipticResult solve_potential(const ScalarField& rho, const BoundaryData& bd, const Params& params,
                               const EllipticOptions& opts, const ScalarField* initial) {
  return solve_dirichlet(rho, side_values(bd, &SideData::w), params.eps, {}, opts, initial);
}

ScalarField laplace_extension(const Grid& grid, const SideValues& boundary, double tol) {
  EllipticOptions opts;
  opts.tol = tol;
  return solve_dirichlet(ScalarField(grid), boundary, 1.0, {}, opts).solution;
}

ScalarField harmonic_extension(const BoundaryData& bd, double tol) {
  return laplace_extension(bd.grid(), side_values(bd, &SideData::w), tol);
}

VelocityField grad(const ScalarField& f) {
  const Grid& g = f.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  VelocityField out(g);
  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) out.ux(i, j) = (f(i, j) - f(i - 1, j)) / g.hx();
    if (g.periodic()) {
      out.ux(0, j) = (f(0, j) - f(nx - 1, j)) / g.hx();
      out.ux(nx, j) = out.ux(0, j);
    } else {
      out.ux(0, j) = 2.0 * out.ux(1, j) - out.ux(2, j);
      out.ux(nx, j) = 2.0 * out.ux(nx - 1, j) - out.ux(nx - 2, j);
    }
  }
  for (int i = 0; i < nx; ++i) {
    for (int j = 1; j < ny; ++j) out.uy(i, j) = (f(i, j) - f(i, j - 1)) / g.hy();
    if (g.periodic()) {
      out.uy(i, 0) = (f(i, 0) - f(i, ny - 1)) / g.hy();
      out.uy(i, ny) = out.uy(i, 0);
    } else {
      out.uy(i, 0) = 2.0 * out.uy(i, 1) - out.uy(i, 2);
      out.uy(i, ny) = 2.0 * out.uy(i, ny - 1) - out.uy(i, ny - 2);
    }
  }
  return out;
}

ScalarField divergence(const VelocityField& u) {
  const Grid& g = u.grid();
  ScalarField out(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      out(i, j) = (u.ux(i + 1, j) - u.ux(i, j)) / g.hx() + (u.uy(i, j + 1) - u.uy(i, j)) / g.hy();
  return out;
}

ProjectionResult solve_pressure_projection(const VelocityField& u_star, double dt, double tol,
                                           Preconditioner preconditioner) {
  if (!(dt > 0.0)) throw InvalidSpec("projection needs dt > 0");
  const Grid& g = u_star.grid();
  VelocityField u = u_star;
  u.apply_boundary();

  // -Lap phi = -div(u*) / dt, so the final residual equals -div(u) / dt.
  ScalarField rhs = divergence(u);
  rhs *= -1.0 / dt;
  EllipticOptions opts;
  opts.tol = tol / dt;
  opts.preconditioner = preconditioner;
  const AxisBc bc = g.periodic() ? AxisBc::Periodic : AxisBc::Neumann;
  EllipticResult solved = solve_linear(rhs, bc, 1.0, {}, opts);
  ScalarField& phi = solved.solution;

  const int nx = g.nx();
  const int ny = g.ny();
  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) u.ux(i, j) -= dt * (phi(i, j) - phi(i - 1, j)) / g.hx();
    if (g.periodic()) u.ux(0, j) -= dt * (phi(0, j) - phi(nx - 1, j)) / g.hx();
  }
  for (int i = 0; i < nx; ++i) {
    for (int j = 1; j < ny; ++j) u.uy(i, j) -= dt * (phi(i, j) - phi(i, j - 1)) / g.hy();
    if (g.periodic()) u.uy(i, 0) -= dt * (phi(i, 0) - phi(i, ny - 1)) / g.hy();
  }
  u.apply_boundary();
  EllipticSolveReport report = solved.report;
  report.residual_l2 *= dt;
  return {std::move(phi), std::move(u), report};
}

}  // namespace nps
