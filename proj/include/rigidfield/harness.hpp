#pragma once

// Batch front-end: built-in scenarios, sweeps and artifact emission.

#include "rigidfield/config.hpp"
#include "rigidfield/diagnostics.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rigidfield {

enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitInvalid = 2, kExitNumerical = 3 };

/// Target map and energy model of a built-in scenario (unit square or unit
/// interval). Solver runs clamp u to the target on the left and right edges.
struct Scenario {
  std::string name;
  PiecewiseRigidMap target;
  EnergyModel model;
};

Scenario build_scenario(const ExperimentConfig& c);

/// Dirichlet grips: target values on the boundary nodes with x at the
/// domain's left or right end.
BoundaryCondition grip_condition(const Scenario& sc, const StructuredGrid& g, bool pin_v);

/// Uniform solver grid with spacing eps / cells_per_eps.
StructuredGrid solver_grid(const Scenario& sc, double eps, int cells_per_eps);

struct SolverRun {
  int iterations = 0;
  bool converged = false;
  double min_v = 0.0;
  double max_v = 0.0;
};

/// Finest-eps products kept for the artifacts.
struct SweepArtifacts {
  std::optional<PhaseFieldState> state;
  std::optional<CoareaReport> coarea;
  std::optional<SegmentationResult> segmentation;
  std::vector<SolverRun> solver_runs;  // one per eps in solver mode
};

/// One row per eps, with the coarea bound and the number of fitted rigid
/// components filled in.
std::vector<SweepRow> sweep(const ExperimentConfig& c, SweepArtifacts* artifacts = nullptr);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Writes sweep.csv, summary.json and (optionally) u.pfld, v.pfld and
/// labels.pfld for the finest eps under c.out_dir.
void run_scenario(const ExperimentConfig& c, std::ostream& log);

/// Maps an exception to the process exit code and prints its message.
int report_failure(const std::exception& e, std::ostream& err);

}  // namespace rigidfield
