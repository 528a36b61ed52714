#pragma once

#include "rigidfield/matrix_kernels.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rigidfield {

using Point = Eigen::Vector2d;
using ScalarFn = std::function<double(double)>;
using BulkFn = std::function<double(const Point&, const MatN&)>;
using FinslerFn = std::function<double(const Point&, const Point&)>;

/// Named building blocks, so a model can be written to and read from a
/// scenario config.
struct ModelDescriptor {
  std::string degradation = "quadratic";  // quadratic: v^2, linear: v
  std::string potential = "at2";          // at2: (1-s)^2, at1: 1-s, double_well: (1-s^2)^2
  std::string finsler = "none";           // none, euclid, l1, ellipse
  std::vector<double> finsler_params;     // ellipse: (a, b) weights on z1, z2
};

/// Phase-field energy ingredients: bulk density W, degradation Phi,
/// potential V and an optional Finsler norm for the gradient term.
struct EnergyModel {
  WellSpec well;
  BulkFn bulk;
  ScalarFn degradation;
  ScalarFn potential;
  std::optional<FinslerFn> finsler;
  ModelDescriptor descriptor;
  /// Phi(v) = v^2 and V(v) = (1-v)^2, so the v-subproblem is quadratic.
  bool quadratic_in_v = false;
  /// bulk is alpha dist^2(., well); lets hot loops skip the std::function.
  bool default_bulk = false;

  /// W = alpha dist^2(., well), Phi and V from the descriptor.
  static EnergyModel from_descriptor(const WellSpec& well, const ModelDescriptor& d);
  /// Phi = v^2, V = (1-v)^2, W = alpha dist^2(., well).
  static EnergyModel at2(const WellSpec& well);

  double alpha() const { return well.alpha; }
};

/// alpha dist^2(F, well) for a row-major n x n matrix, n <= 2, without
/// allocating; 3x3 falls back to dist2_to_well.
double well_density(const WellSpec& well, const double* f, int n);

ScalarFn make_potential(const std::string& name);
ScalarFn make_degradation(const std::string& name);
std::optional<FinslerFn> make_finsler(const std::string& name, const std::vector<double>& params);

/// Exponents of the parameter schedule: k_eps = eps^-kappa, xi_eps = eps^rho.
struct Schedule {
  double eps = 0.1;
  double kappa = 1.0;
  double rho = 2.0;

  void validate() const;
  double k_eps() const;
  double xi_eps() const;
};

std::pair<double, double> schedule_params(const Schedule& s);

/// 2 * integral_0^1 sqrt(V(s)) ds, tanh-sinh quadrature to 1e-8 absolute.
double surface_constant(const ScalarFn& potential);

struct HypothesisCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<HypothesisCheck> checks;
  bool passed() const;
};

/// Samples the structural hypotheses on Phi, V, W and the Finsler norm.
ValidationReport validate_model(const EnergyModel& m, int samples = 1000);

}  // namespace rigidfield
