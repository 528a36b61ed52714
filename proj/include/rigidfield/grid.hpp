#pragma once

// Tensor-product Q1 discretization of the phase-field energies.

#include "rigidfield/energy_model.hpp"
#include "rigidfield/sharp_interface.hpp"

#include <filesystem>
#include <functional>
#include <vector>

namespace rigidfield {

/// Tensor-product grid in 1D or 2D. Node coordinates per axis may be graded;
/// uniform grids are the special case built by uniform_1d / uniform_2d.
class StructuredGrid {
 public:
  static StructuredGrid uniform_1d(double x0, double length, int nx);
  static StructuredGrid uniform_2d(const Point& origin, double lx, double ly, int nx, int ny);
  /// ys empty gives a 1D grid.
  static StructuredGrid rectilinear(std::vector<double> xs, std::vector<double> ys = {});

  int dim() const { return ys_.empty() ? 1 : 2; }
  int nx() const { return static_cast<int>(xs_.size()) - 1; }
  int ny() const { return dim() == 1 ? 0 : static_cast<int>(ys_.size()) - 1; }
  std::size_t nodes_x() const { return xs_.size(); }
  std::size_t nodes_y() const { return dim() == 1 ? 1 : ys_.size(); }
  std::size_t node_count() const { return nodes_x() * nodes_y(); }
  std::size_t cell_count() const { return static_cast<std::size_t>(nx()) * (dim() == 1 ? 1 : ny()); }
  std::size_t node(std::size_t i, std::size_t j) const { return j * nodes_x() + i; }
  Point node_point(std::size_t idx) const;
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }
  double hx(std::size_t i) const { return xs_[i + 1] - xs_[i]; }
  double hy(std::size_t j) const { return dim() == 1 ? 1.0 : ys_[j + 1] - ys_[j]; }
  double max_h() const;
  bool uniform() const;
  Box bounds() const;
  bool on_boundary(std::size_t idx) const;
  /// Shifts every node coordinate.
  StructuredGrid translated(const Point& shift) const;

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

/// Nodal displacement (components interleaved per node) and phase field.
struct PhaseFieldState {
  StructuredGrid grid;
  int components = 2;
  std::vector<double> u;
  std::vector<double> v;

  static PhaseFieldState make(const StructuredGrid& grid, int components);
  void validate() const;
  VecN u_at(std::size_t node) const;
};

struct EnergyBreakdown {
  double bulk = 0.0;
  double potential = 0.0;
  double surface_gradient = 0.0;
  double total = 0.0;
};

/// Gauss points of the reference cell: 2 per axis at (1 -+ 1/sqrt 3)/2.
struct QuadraturePoint {
  std::size_t cell;
  Point x;
  double weight;  // includes the cell measure
};

/// Nodal samples of the map; interface nodes follow the lowest-index rule.
std::vector<double> sample_pr_map(const StructuredGrid& g, const PiecewiseRigidMap& u);

/// Q1 gradient of u at every Gauss point (cell-major, 2^dim per cell).
std::vector<MatN> deformation_gradient(const PhaseFieldState& s, bool symmetric = false);
std::vector<QuadraturePoint> quadrature_points(const StructuredGrid& g);

using CellMask = std::function<bool(std::size_t i, std::size_t j)>;

/// Gauss quadrature of k Phi(v) W(x, grad u), V(v)/eps and eps|grad v|^2
/// (eps phi^2(x, grad v) with a Finsler norm). Cells are reduced in a fixed
/// row-major order, so totals are bitwise reproducible for any worker count.
EnergyBreakdown assemble_energy(const PhaseFieldState& s, const EnergyModel& m, const Schedule& sch,
                                const CellMask& mask = {});

struct FieldFile {
  StructuredGrid grid;
  int components = 1;
  std::vector<double> data;
};

/// `.pfld`: one JSON header line {n, nx, ny, hx, hy, components, count, ...}
/// followed by count little-endian float64 values, node-ordered row-major,
/// components interleaved.
void dump_field(const std::filesystem::path& path, const StructuredGrid& g, int components,
                const std::vector<double>& data);
FieldFile load_field(const std::filesystem::path& path);

}  // namespace rigidfield
