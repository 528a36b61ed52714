#include "rigidfield/optimal_profile.hpp"

#include "rigidfield/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace rigidfield {

namespace {

constexpr double kFdStep = 1e-5;

double d1(const ScalarFn& f, double s) { return (f(s + kFdStep) - f(s - kFdStep)) / (2.0 * kFdStep); }

double d2(const ScalarFn& f, double s) {
  return (f(s + kFdStep) - 2.0 * f(s) + f(s - kFdStep)) / (kFdStep * kFdStep);
}

std::vector<double> gradient(const std::vector<double>& w, double h, const ScalarFn& V) {
  const std::size_t n = w.size();
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i)
    g[i] = h * d1(V, w[i]) + (2.0 / h) * (2.0 * w[i] - w[i - 1] - w[i + 1]);
  return g;
}

bool at_lower(double w, double g) { return w <= 0.0 && g > 0.0; }
bool at_upper(double w, double g) { return w >= 1.0 && g < 0.0; }

double projected_gradient_norm(const std::vector<double>& w, const std::vector<double>& g) {
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < w.size(); ++i)
    if (!at_lower(w[i], g[i]) && !at_upper(w[i], g[i])) s += g[i] * g[i];
  return std::sqrt(s);
}

std::vector<double> equipartition_start(const ScalarFn& V, std::size_t cells, double h) {
  std::vector<double> w(cells + 1, 0.0);
  const auto rhs = [&](double s) { return std::sqrt(std::max(0.0, V(std::clamp(s, 0.0, 1.0)))); };
  double s = 1e-6;
  for (std::size_t i = 1; i < cells; ++i) {
    const double k1 = rhs(s);
    const double k2 = rhs(s + 0.5 * h * k1);
    const double k3 = rhs(s + 0.5 * h * k2);
    const double k4 = rhs(s + h * k3);
    s = std::clamp(s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), 0.0, 1.0);
    w[i] = s;
  }
  w[0] = 0.0;
  w[cells] = 1.0;
  return w;
}

}  // namespace

double profile_energy(const std::vector<double>& w, double h, const ScalarFn& potential) {
  double e = 0.0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    const double slope = (w[i + 1] - w[i]) / h;
    e += h * (0.5 * (potential(w[i]) + potential(w[i + 1])) + slope * slope);
  }
  return e;
}

ProfileSolution solve_profile(const ScalarFn& potential, double T, double h, int max_iterations) {
  if (!(T > 0.0) || !(h > 0.0) || h > T / 10.0)
    throw InvalidInput("solve_profile: need T > 0 and 0 < h <= T/10");
  const auto cells = static_cast<std::size_t>(std::llround(T / h));
  const double dt = T / static_cast<double>(cells);
  std::vector<double> w = equipartition_start(potential, cells, dt);
  double energy = profile_energy(w, dt, potential);

  const std::size_t n = w.size();
  std::vector<double> diag(n), rhs(n), dir(n), trial(n), cp(n), dp(n);
  int it = 0;
  for (;; ++it) {
    const std::vector<double> g = gradient(w, dt, potential);
    if (projected_gradient_norm(w, g) < 1e-9) break;
    if (it >= max_iterations)
      throw NumericalFailure("solve_profile: projected Newton did not converge", w);

    // Newton system on the free nodes; bound-active nodes take a scaled
    // gradient step and decouple from the tridiagonal solve.
    const double off = -2.0 / dt;
    std::vector<char> free(n, 0);
    for (std::size_t i = 1; i + 1 < n; ++i) free[i] = !(at_lower(w[i], g[i]) || at_upper(w[i], g[i]));
    for (std::size_t i = 0; i < n; ++i) {
      diag[i] = 4.0 / dt + dt * std::max(0.0, d2(potential, w[i]));
      rhs[i] = -g[i];
    }
    // Thomas algorithm on the free-node system; fixed rows are identity.
    for (std::size_t i = 0; i < n; ++i) {
      const bool fi = free[i];
      const double a = (fi && i > 0 && free[i - 1]) ? off : 0.0;
      const double c = (fi && i + 1 < n && free[i + 1]) ? off : 0.0;
      const double b = fi ? diag[i] : 1.0;
      const double r = fi ? rhs[i] : 0.0;
      const double denom = b - (i > 0 ? a * cp[i - 1] : 0.0);
      cp[i] = c / denom;
      dp[i] = (r - (i > 0 ? a * dp[i - 1] : 0.0)) / denom;
    }
    for (std::size_t k = n; k-- > 0;) dir[k] = dp[k] - (k + 1 < n ? cp[k] * dir[k + 1] : 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i)
      if (!free[i]) dir[i] = -g[i] / diag[i];

    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      double decrease = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = (i == 0 || i + 1 == n) ? w[i] : std::clamp(w[i] + step * dir[i], 0.0, 1.0);
        decrease += g[i] * (trial[i] - w[i]);
      }
      const double e_trial = profile_energy(trial, dt, potential);
      if (e_trial <= energy + 1e-4 * decrease) {
        accepted = true;
        w.swap(trial);
        energy = e_trial;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No further decrease representable in double precision.
      if (projected_gradient_norm(w, g) < 1e-7) break;
      throw NumericalFailure("solve_profile: line search failed", w);
    }
  }
  ProfileSolution p;
  p.T = T;
  p.h = dt;
  p.w = std::move(w);
  p.energy = energy;
  p.iterations = it;
  return p;
}

double equipartition_defect(const ProfileSolution& p, const ScalarFn& potential) {
  double defect = 0.0;
  for (std::size_t i = 1; i + 1 < p.w.size(); ++i) {
    const double slope = (p.w[i + 1] - p.w[i - 1]) / (2.0 * p.h);
    defect = std::max(defect, std::abs(potential(p.w[i]) - slope * slope));
  }
  return defect;
}

Transition::Transition(const ProfileSolution& p, double eps, double xi)
    : w_(p.w), h_(p.h), T_(p.T), eps_(eps), xi_(xi) {
  if (!(xi > 0.0) || !(eps > 0.0) || xi >= eps)
    throw InvalidInput("build_transition: need 0 < xi < eps");
  if (w_.size() < 2) throw InvalidInput("build_transition: empty profile");
  double running = 0.0;
  for (auto& x : w_) {
    running = std::max(running, std::clamp(x, 0.0, 1.0));
    x = running;
  }
  w_.front() = 0.0;
  w_.back() = 1.0;
}

double Transition::operator()(double t) const {
  if (t <= xi_) return 0.0;
  if (t >= outer()) return 1.0;
  const double s = (t - xi_) / eps_ / h_;
  const auto i = std::min(static_cast<std::size_t>(s), w_.size() - 2);
  const double f = s - static_cast<double>(i);
  return (1.0 - f) * w_[i] + f * w_[i + 1];
}

Transition build_transition(const ProfileSolution& p, double eps, double xi) { return Transition(p, eps, xi); }

void write_profile_csv(const std::filesystem::path& path, const ProfileSolution& p) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "t,w\n";
  char buf[64];
  for (std::size_t i = 0; i < p.w.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.node_t(i), p.w[i]);
    out << buf;
  }
}

}  // namespace rigidfield
