#pragma once

// Recovery pairs (u_eps, v_eps) for a polyhedral piecewise-rigid target and
// the epsilon-sweep that compares their energies with the sharp limit.

#include "rigidfield/grid.hpp"
#include "rigidfield/optimal_profile.hpp"

#include <functional>
#include <vector>

namespace rigidfield {

/// Geometry of one jump facet. Normal distances are divided by `scale`
/// (phi(x_mid, nu) for a Finsler model, 1 otherwise), so the transition
/// layer has width scale * (xi + eps T) in physical units.
struct FacetLayer {
  JumpFacet facet;
  Point origin;
  Point tangent;
  Point normal;
  double length = 0.0;  // 0 in 1D
  double scale = 1.0;
  // Largest normal / tangential extent |n1| hx + |n2| hy of the cells that
  // meet the facet's inner slab (physical units).
  double normal_extent = 0.0;
  double tangent_extent = 0.0;

  /// d_i: scaled distance to the facet's line (point in 1D).
  double distance(const Point& x) const;
  /// Distance of the projection onto the line from the facet itself; 0 in 1D.
  double inplane(const Point& x) const;
};

/// Slabs per facet: A (in-plane eps, normal xi), A' (eps/2, xi/2),
/// B (2 eps, xi + eps T), H = B-part over S^eps outside A, I = B-part over
/// S^{2eps} minus S^eps.
class RecoveryLayers {
 public:
  RecoveryLayers() = default;
  RecoveryLayers(std::vector<FacetLayer> facets, double eps, double xi, double outer);

  const std::vector<FacetLayer>& facets() const { return facets_; }
  double eps() const { return eps_; }
  double xi() const { return xi_; }
  double outer() const { return outer_; }

  bool in_A(std::size_t i, const Point& x) const;
  bool in_A_prime(std::size_t i, const Point& x) const;
  bool in_B(std::size_t i, const Point& x) const;
  bool in_H(std::size_t i, const Point& x) const;
  bool in_I(std::size_t i, const Point& x) const;

  bool in_A(const Point& x) const;
  bool in_A_prime(const Point& x) const;
  bool in_B(const Point& x) const;
  /// Number of facets whose B slab contains x.
  int b_count(const Point& x) const;

 private:
  std::vector<FacetLayer> facets_;
  double eps_ = 0.0;
  double xi_ = 0.0;
  double outer_ = 0.0;
};

/// Grid construction for the sweep: uniform spacing eps / cells_per_eps;
/// with refine_facets, node lines are added at c, c +- scale xi / 2 and
/// c +- scale xi around each axis-parallel facet (and base lines strictly
/// inside that band dropped), so the A slab is resolved by two cells per side.
struct GridRule {
  int cells_per_eps = 16;
  bool refine_facets = true;
};

StructuredGrid recovery_grid(const PiecewiseRigidMap& u, const EnergyModel& m, double eps, double xi,
                             const GridRule& rule);

/// Per-facet geometry on a grid. Throws InvalidInput when eps < 8 max h or
/// when a facet's inner slab is thinner than two cells (xi scale < 2 extent).
RecoveryLayers make_layers(const PiecewiseRigidMap& u, const EnergyModel& m, const StructuredGrid& g,
                           const Transition& h);

struct RecoveryV {
  std::vector<double> v;
  RecoveryLayers layers;
};

/// v = min_i [gamma_i h_eps(d_i) + 1 - gamma_i], gamma_i the in-plane cutoff
/// (1 up to eps, 0 beyond 2 eps). Checks v = 0 on A and v = 1 outside B at
/// every node.
RecoveryV build_recovery_v(const PiecewiseRigidMap& u, const EnergyModel& m, const Schedule& sch,
                           const ProfileSolution& profile, const StructuredGrid& g);

/// (1 - phi) u with phi = 1 on A', 0 outside A. The ramps end one cell
/// extent inside A, so every cell touching phi > 0 has v = 0 at all nodes.
std::vector<double> build_recovery_u(const PiecewiseRigidMap& u, const RecoveryLayers& layers,
                                     const StructuredGrid& g);

/// Area of the cells whose centre lies in at least two B slabs.
double overlap_measure(const StructuredGrid& g, const RecoveryLayers& layers);

struct SweepRow {
  double eps = 0.0;
  double k_eps = 0.0;
  double xi_eps = 0.0;
  EnergyBreakdown energy;
  double limit = 0.0;
  double rel_gap = 0.0;  // |total - limit| / limit; total itself when limit = 0
  double overlap = 0.0;
  double coarea_bound = 0.0;
  int pieces = 0;
};

struct SweepOptions {
  double kappa = 1.0;
  double rho = 2.0;
  double profile_T = 8.0;
  double profile_h = 1e-3;
  GridRule grid;
};

/// Called once per eps with the finished row (mutable, so extra columns can
/// be filled) and the recovery state; the state is dropped afterwards.
using SweepHook = std::function<void(SweepRow&, const PhaseFieldState&, const RecoveryLayers&)>;

std::vector<SweepRow> limsup_sweep(const PiecewiseRigidMap& u, const EnergyModel& m, const std::vector<double>& eps_list,
                                   const SweepOptions& opt, const SweepHook& hook = {});

}  // namespace rigidfield
