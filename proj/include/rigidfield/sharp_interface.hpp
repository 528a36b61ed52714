#pragma once

// Finite polyhedral piecewise-rigid maps and the sharp-interface energies
// they carry.

#include "rigidfield/energy_model.hpp"

#include <string>
#include <vector>

namespace rigidfield {

struct Box {
  Point lo{0.0, 0.0};
  Point hi{1.0, 1.0};

  double width() const { return hi.x() - lo.x(); }
  double height() const { return hi.y() - lo.y(); }
};

struct Polygon {
  std::vector<Point> vertices;  // counter-clockwise after normalization

  double signed_area() const;
  double area() const { return std::abs(signed_area()); }
  /// Winding-number test; points on the boundary count as inside.
  bool contains(const Point& p, double tol = 1e-12) const;
  bool on_boundary(const Point& p, double tol = 1e-12) const;
};

/// Partition of a rectangle into polygons (dim 2) or of an interval into
/// consecutive subintervals (dim 1, pieces described by interior cuts).
class PolyhedralPartition {
 public:
  static PolyhedralPartition polygons(const Box& domain, std::vector<Polygon> pieces);
  static PolyhedralPartition interval(double a, double b, std::vector<double> cuts);

  int dim() const { return dim_; }
  const Box& domain() const { return domain_; }
  std::size_t piece_count() const;
  const std::vector<Polygon>& pieces() const { return pieces_; }
  const std::vector<double>& cuts() const { return cuts_; }
  double domain_measure() const;
  double piece_measure(std::size_t i) const;

  /// Throws InvalidInput describing the first broken invariant.
  void validate() const;
  bool inside_domain(const Point& x, double tol = 1e-12) const;
  /// Lowest-index piece containing x (boundary inclusive); -1 if none.
  int locate(const Point& x) const;

 private:
  int dim_ = 2;
  Box domain_;
  std::vector<Polygon> pieces_;
  std::vector<double> cuts_;
};

struct RigidMotion {
  MatN A;
  VecN b;

  VecN apply(const Point& x) const;
};

bool same_motion(const RigidMotion& a, const RigidMotion& b);

struct PiecewiseRigidMap {
  PolyhedralPartition partition;
  std::vector<RigidMotion> motions;
  WellSpec well;

  int n() const { return well.n; }
};

struct JumpFacet {
  Point a;  // endpoints; a == b in 1D
  Point b;
  Point normal;  // unit, pointing from piece `left` into piece `right`
  int left = -1;
  int right = -1;
  double measure = 0.0;  // length (2D) or count (1D)

  Point tangent() const;
};

/// Interior shared edges (2D) or cut points (1D), each listed once.
std::vector<JumpFacet> facet_list(const PolyhedralPartition& p);

/// Facets whose two sides carry different motions.
std::vector<JumpFacet> jump_facets(const PiecewiseRigidMap& u);

double jump_measure(const PiecewiseRigidMap& u);

/// 2 C_V H^{n-1}(J_u), or 2 C_V sum_facets int phi(x, nu) dH^{n-1} with
/// 64-subsegment midpoint quadrature when the model has a Finsler norm.
double limit_energy(const PiecewiseRigidMap& u, const EnergyModel& m);

/// A_i x + b_i on the lowest-index piece containing x.
VecN eval_map(const PiecewiseRigidMap& u, const Point& x);

struct MapReport {
  bool passed = true;
  std::vector<std::string> issues;
  std::vector<double> well_distance;  // per piece
};

MapReport validate_map(const PiecewiseRigidMap& u);

}  // namespace rigidfield
