#pragma once

// Scenario configuration: a flat sectioned key = value file (see README).

#include "rigidfield/energy_model.hpp"
#include "rigidfield/recovery.hpp"
#include "rigidfield/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace rigidfield {

enum class RunMode { Recovery, Solver };

struct ExperimentConfig {
  std::string scenario = "crack2d_vertical";
  RunMode mode = RunMode::Recovery;

  // scenario geometry overrides; NaN keeps the scenario default
  double angle = std::numeric_limits<double>::quiet_NaN();
  double stretch = std::numeric_limits<double>::quiet_NaN();

  std::string well = "rotation";  // rotation, skew, finite
  double alpha = 1.0;
  ModelDescriptor model;

  double kappa = 1.0;
  double rho = 2.0;
  std::vector<double> eps_list{1.0 / 16, 1.0 / 32};

  GridRule grid;
  double profile_T = 8.0;
  double profile_h = 1e-3;

  SolveOptions solver;
  bool pin_v = true;

  double coarea_delta = 0.05;
  int coarea_levels = 32;
  double segment_threshold = 0.5;

  std::filesystem::path out_dir = "results";
  bool deterministic = false;
  std::uint64_t seed = 0;
  bool dump_fields = true;

  /// Throws InvalidInput naming the broken invariant.
  void validate() const;
  SweepOptions sweep_options() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// "0.1, 0.05", "[1/16, 1/32]" and similar.
std::vector<double> parse_number_list(const std::string& text);
double parse_number(const std::string& text);

std::string mode_name(RunMode m);

}  // namespace rigidfield
