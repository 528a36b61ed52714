#pragma once

// Staggered minimization of the assembled phase-field energy: an exact
// quadratic v-subproblem alternating with a (Gauss-Newton) u-subproblem.

#include "rigidfield/grid.hpp"

#include <functional>
#include <vector>

namespace rigidfield {

/// Dirichlet data for u. With pin_v set, v is held at 1 on the same nodes
/// (clamped grips stay sound); otherwise v is free everywhere.
struct BoundaryCondition {
  std::vector<std::size_t> nodes;
  std::vector<VecN> values;
  bool pin_v = false;

  static BoundaryCondition from_function(const StructuredGrid& g, const std::function<bool(const Point&)>& select,
                                         const std::function<VecN(const Point&)>& value, bool pin_v = false);
  void validate(const StructuredGrid& g, int components) const;
  bool empty() const { return nodes.empty(); }
};

struct SolveOptions {
  double tol = 1e-9;          // outer stop: decrease < tol (1 + |E|)
  int max_outer = 500;
  double cg_tol = 1e-10;      // relative residual
  int max_gauss_newton = 50;
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> trace;  // energy after every half-step, starting with the initial energy
  EnergyBreakdown final;
  bool converged = false;
  std::vector<double> residuals;  // CG relative residuals, in solve order
  double min_v = 1.0;
  double max_v = 0.0;
};

/// Least-squares affine fit of the boundary data, evaluated everywhere and
/// overwritten by the data on Dirichlet nodes; v = 1.
PhaseFieldState initial_state(const StructuredGrid& g, const BoundaryCondition& bc, int components);

/// Exact minimizer in v (Phi = v^2, V = (1-v)^2) by conjugate gradients,
/// clamped to [0,1].
void v_step(PhaseFieldState& s, const EnergyModel& m, const Schedule& sch, const BoundaryCondition& bc = {},
            SolveReport* report = nullptr, const SolveOptions& opt = {});

/// Minimizes the bulk term in u: one CG solve for the linearised well,
/// Gauss-Newton with a backtracking search on the true energy otherwise.
void u_step(PhaseFieldState& s, const EnergyModel& m, const Schedule& sch, const BoundaryCondition& bc,
            SolveReport* report = nullptr, const SolveOptions& opt = {});

/// Bulk energy int k Phi(v) W(grad u) and its gradient with respect to the
/// nodal u values, using dW/dF = 2 alpha (F - P(F)) with P the well projection.
double bulk_energy(const PhaseFieldState& s, const EnergyModel& m, const Schedule& sch,
                   std::vector<double>* gradient = nullptr);

struct SolveResult {
  PhaseFieldState state;
  SolveReport report;
};

SolveResult alternate_minimize(const PhaseFieldState& init, const EnergyModel& m, const Schedule& sch,
                               const BoundaryCondition& bc, const SolveOptions& opt = {});

}  // namespace rigidfield
