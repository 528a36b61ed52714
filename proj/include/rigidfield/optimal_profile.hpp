#pragma once

// One-dimensional optimal transition between the broken (0) and sound (1)
// phase, and the rescaled transition used to build recovery phase fields.

#include "rigidfield/energy_model.hpp"

#include <filesystem>
#include <vector>

namespace rigidfield {

struct ProfileSolution {
  double T = 0.0;
  double h = 0.0;
  std::vector<double> w;  // nodal values at t_i = i h, i = 0..N
  double energy = 0.0;
  int iterations = 0;

  double node_t(std::size_t i) const { return static_cast<double>(i) * h; }
};

/// Trapezoidal energy sum_i h [(V(w_i) + V(w_{i+1}))/2 + ((w_{i+1} - w_i)/h)^2].
double profile_energy(const std::vector<double>& w, double h, const ScalarFn& potential);

/// Minimizes the discrete profile energy over w(0) = 0, w(T) = 1, 0 <= w <= 1.
/// Starts from the equipartition ODE w' = sqrt(V(w)) and refines with a
/// projected Newton method (tridiagonal Hessian, Armijo search along the
/// projection arc) until the projected gradient norm is below 1e-9.
ProfileSolution solve_profile(const ScalarFn& potential, double T, double h, int max_iterations = 200);

/// max over interior nodes of |V(w) - (w')^2| with centered differences.
double equipartition_defect(const ProfileSolution& p, const ScalarFn& potential);

/// h_eps(t): 0 on [0, xi], w((t - xi)/eps) on [xi, xi + eps T], 1 beyond.
/// The stored profile is monotonized by a cumulative max.
class Transition {
 public:
  Transition(const ProfileSolution& p, double eps, double xi);

  double operator()(double t) const;
  double eps() const { return eps_; }
  double xi() const { return xi_; }
  double horizon() const { return T_; }
  /// Distance at which the transition reaches 1: xi + eps T.
  double outer() const { return xi_ + eps_ * T_; }

 private:
  std::vector<double> w_;
  double h_;
  double T_;
  double eps_;
  double xi_;
};

Transition build_transition(const ProfileSolution& p, double eps, double xi);

/// Two-column CSV (t, w).
void write_profile_csv(const std::filesystem::path& path, const ProfileSolution& p);

}  // namespace rigidfield
