#pragma once

// Rectangular cell-centered grid with MAC-staggered velocity storage,
// per-side boundary traces and the discrete norms shared by every solver.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace nps {

struct GridSpec {
  int nx = 32;
  int ny = 32;
  double lx = 1.0;
  double ly = 1.0;

  bool operator==(const GridSpec&) const = default;
};

/// Sides in counterclockwise order starting from the bottom edge.
enum class Side { Bottom = 0, Right = 1, Top = 2, Left = 3 };
inline constexpr std::array<Side, 4> kSides{Side::Bottom, Side::Right, Side::Top, Side::Left};

std::string_view to_string(Side side);

struct BoundaryFace {
  Side side;
  int index;  // position along the side in increasing coordinate order
  double x;
  double y;
  double s;  // counterclockwise arclength from the side's starting corner
};

class Grid {
 public:
  Grid() = default;
  /// Throws InvalidSpec when the spec violates nx, ny >= 4 or lx, ly > 0.
  explicit Grid(const GridSpec& spec, bool periodic = false);

  const GridSpec& spec() const { return spec_; }
  int nx() const { return spec_.nx; }
  int ny() const { return spec_.ny; }
  double lx() const { return spec_.lx; }
  double ly() const { return spec_.ly; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  double h_min() const { return hx_ < hy_ ? hx_ : hy_; }
  double cell_area() const { return hx_ * hy_; }
  int cells() const { return spec_.nx * spec_.ny; }
  /// Periodic grids exist only for the Stokes test harness; ionic and
  /// potential solvers require walls.
  bool periodic() const { return periodic_; }

  double xc(int i) const { return (i + 0.5) * hx_; }
  double yc(int j) const { return (j + 0.5) * hy_; }
  double xf(int i) const { return i * hx_; }
  double yf(int j) const { return j * hy_; }

  int side_faces(Side side) const;
  int boundary_face_count() const { return 2 * (spec_.nx + spec_.ny); }
  double side_length(Side side) const;
  /// Face spacing along a side.
  double side_h(Side side) const;
  /// Boundary faces in counterclockwise loop order.
  std::vector<BoundaryFace> boundary_faces() const;
  BoundaryFace boundary_face(Side side, int index) const;

  bool operator==(const Grid& o) const { return spec_ == o.spec_ && periodic_ == o.periodic_; }

 private:
  GridSpec spec_{};
  double hx_ = 0.0;
  double hy_ = 0.0;
  bool periodic_ = false;
};

Grid build_grid(const GridSpec& spec);

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& grid, double value = 0.0)
      : grid_(grid), values_(static_cast<std::size_t>(grid.cells()), value) {}

  static ScalarField sample(const Grid& grid, const std::function<double(double, double)>& f);

  const Grid& grid() const { return grid_; }
  double& operator()(int i, int j) { return values_[index(i, j)]; }
  double operator()(int i, int j) const { return values_[index(i, j)]; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(grid_.nx()) * static_cast<std::size_t>(j);
  }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double a);
  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

  bool operator==(const ScalarField& o) const { return grid_ == o.grid_ && values_ == o.values_; }

 private:
  Grid grid_{};
  std::vector<double> values_;
};

/// MAC velocity: ux on x-normal faces ((nx+1) x ny), uy on y-normal faces (nx x (ny+1)).
class VelocityField {
 public:
  VelocityField() = default;
  explicit VelocityField(const Grid& grid)
      : grid_(grid),
        ux_(static_cast<std::size_t>((grid.nx() + 1) * grid.ny()), 0.0),
        uy_(static_cast<std::size_t>(grid.nx() * (grid.ny() + 1)), 0.0) {}

  /// Samples component functions at face centers.
  static VelocityField sample(const Grid& grid, const std::function<double(double, double)>& fx,
                              const std::function<double(double, double)>& fy);

  const Grid& grid() const { return grid_; }
  double& ux(int i, int j) { return ux_[static_cast<std::size_t>(i + (grid_.nx() + 1) * j)]; }
  double ux(int i, int j) const { return ux_[static_cast<std::size_t>(i + (grid_.nx() + 1) * j)]; }
  double& uy(int i, int j) { return uy_[static_cast<std::size_t>(i + grid_.nx() * j)]; }
  double uy(int i, int j) const { return uy_[static_cast<std::size_t>(i + grid_.nx() * j)]; }
  std::span<double> ux_values() { return ux_; }
  std::span<const double> ux_values() const { return ux_; }
  std::span<double> uy_values() { return uy_; }
  std::span<const double> uy_values() const { return uy_; }

  /// Zeroes wall-normal faces, or copies the wrap-around faces on a periodic grid.
  void apply_boundary();

  VelocityField& operator+=(const VelocityField& o);
  VelocityField& operator-=(const VelocityField& o);
  VelocityField& operator*=(double a);
  friend VelocityField operator+(VelocityField a, const VelocityField& b) { return a += b; }
  friend VelocityField operator-(VelocityField a, const VelocityField& b) { return a -= b; }
  friend VelocityField operator*(double s, VelocityField a) { return a *= s; }

  bool operator==(const VelocityField& o) const { return grid_ == o.grid_ && ux_ == o.ux_ && uy_ == o.uy_; }

 private:
  Grid grid_{};
  std::vector<double> ux_;
  std::vector<double> uy_;
};

enum class BoundaryMode { Dirichlet, Blocking };

std::string_view to_string(BoundaryMode mode);

struct SideData {
  std::vector<double> gamma1;
  std::vector<double> gamma2;
  std::vector<double> w;
  BoundaryMode mode = BoundaryMode::Dirichlet;
};

/// Boundary samples on a closed loop, counterclockwise.
using BoundaryTrace = std::vector<double>;

class BoundaryData {
 public:
  BoundaryData() = default;
  explicit BoundaryData(const Grid& grid);

  static BoundaryData uniform(const Grid& grid, double gamma1, double gamma2, double w);
  /// Builds traces from per-face functions of the boundary face geometry.
  static BoundaryData from_functions(const Grid& grid, const std::function<double(const BoundaryFace&)>& gamma1,
                                     const std::function<double(const BoundaryFace&)>& gamma2,
                                     const std::function<double(const BoundaryFace&)>& w);

  const Grid& grid() const { return grid_; }
  SideData& side(Side s) { return sides_[static_cast<std::size_t>(s)]; }
  const SideData& side(Side s) const { return sides_[static_cast<std::size_t>(s)]; }

  void set_mode(BoundaryMode mode);
  bool all_dirichlet() const;
  bool all_blocking() const;

  BoundaryTrace gamma1_trace() const;
  BoundaryTrace gamma2_trace() const;
  BoundaryTrace w_trace() const;

  /// Throws ValidationError listing every non-positive Dirichlet concentration,
  /// non-finite sample, or sample-count mismatch.
  void validate() const;

 private:
  BoundaryTrace loop(std::vector<double> SideData::*member) const;

  Grid grid_{};
  std::array<SideData, 4> sides_{};
};

struct Params {
  double d1 = 1.0;
  double d2 = 1.0;
  double eps = 0.5;
  double nu = 1.0;
  double kc = 1.0;

  /// Throws InvalidSpec unless all five constants are strictly positive.
  void validate() const;
};

double l2_norm(const ScalarField& f);
double linf_norm(const ScalarField& f);
double integral(const ScalarField& f);
double mean(const ScalarField& f);
double min_value(const ScalarField& f);
/// Face-area weighted L2 norm; wall faces carry half weight.
double l2_norm_velocity(const VelocityField& u);
double linf_norm_velocity(const VelocityField& u);
bool all_finite(const ScalarField& f);
bool all_finite(const VelocityField& u);

/// Closed-loop integral of f times the counterclockwise tangential
/// derivative of g. Discretely antisymmetric in (f, g).
double boundary_tangential_integral(std::span<const double> f, std::span<const double> g);

}  // namespace nps
