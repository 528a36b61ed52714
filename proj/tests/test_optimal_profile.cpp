#include "rigidfield/errors.hpp"
#include "rigidfield/optimal_profile.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace rigidfield;

namespace {

// For V = (1-w)^2 the discrete energy is quadratic in z = 1 - w; its
// minimizer solves a tridiagonal system, assembled here densely.
double quadratic_oracle(double T, double h) {
  const int cells = static_cast<int>(std::lround(T / h));
  const int m = cells - 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    A(i, i) = 2.0 * h + 4.0 / h;
    if (i > 0) A(i, i - 1) = -2.0 / h;
    if (i + 1 < m) A(i, i + 1) = -2.0 / h;
  }
  b(0) = 2.0 / h;  // z(0) = 1
  const Eigen::VectorXd z = A.ldlt().solve(b);
  std::vector<double> w(static_cast<std::size_t>(cells) + 1);
  w[0] = 0.0;
  w.back() = 1.0;
  for (int i = 0; i < m; ++i) w[static_cast<std::size_t>(i) + 1] = 1.0 - z(i);
  return profile_energy(w, h, [](double s) { return (1 - s) * (1 - s); });
}

}  // namespace

TEST_CASE("AT2 profile matches the quadratic oracle and coth(T)") {
  const ScalarFn V = make_potential("at2");
  for (double T : {2.0, 5.0}) {
    const ProfileSolution p = solve_profile(V, T, 1e-2);
    CHECK(p.energy == doctest::Approx(quadratic_oracle(T, 1e-2)).epsilon(1e-10));
    CHECK(p.energy == doctest::Approx(1.0 / std::tanh(T)).epsilon(1e-4));
    CHECK(p.w.front() == 0.0);
    CHECK(p.w.back() == 1.0);
  }
}

TEST_CASE("profile is monotone, bounded and nearly equipartitioned") {
  const ScalarFn V = make_potential("at2");
  const ProfileSolution p = solve_profile(V, 8.0, 1e-3);
  for (std::size_t i = 0; i + 1 < p.w.size(); ++i) {
    CHECK(p.w[i] >= 0.0);
    CHECK(p.w[i] <= 1.0);
  }
  bool monotone = true;
  for (std::size_t i = 0; i + 1 < p.w.size(); ++i) monotone = monotone && p.w[i + 1] >= p.w[i] - 1e-12;
  CHECK(monotone);
  CHECK(equipartition_defect(p, V) < 1e-3);
}

TEST_CASE("AT1 profile reaches its energy 4/3") {
  const ScalarFn V = make_potential("at1");
  const ProfileSolution p = solve_profile(V, 4.0, 1e-3);
  CHECK(p.energy == doctest::Approx(4.0 / 3.0).epsilon(1e-3));
}

TEST_CASE("solve_profile rejects coarse grids") {
  CHECK_THROWS_AS(solve_profile(make_potential("at2"), 1.0, 0.2), InvalidInput);
  CHECK_THROWS_AS(solve_profile(make_potential("at2"), -1.0, 0.01), InvalidInput);
}

TEST_CASE("transition: plateau, rescaled profile, saturation") {
  const ProfileSolution p = solve_profile(make_potential("at2"), 8.0, 1e-3);
  const double eps = 0.1, xi = 0.01;
  const Transition h = build_transition(p, eps, xi);
  CHECK(h(0.0) == 0.0);
  CHECK(h(xi) == 0.0);
  CHECK(h(h.outer()) == 1.0);
  CHECK(h(10.0) == 1.0);
  // t = xi + eps * t0 maps to the profile at t0
  const double t0 = 2.0;
  const std::size_t i = static_cast<std::size_t>(std::lround(t0 / p.h));
  CHECK(h(xi + eps * t0) == doctest::Approx(p.w[i]).epsilon(1e-9));
  double prev = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double v = h(k * h.outer() / 1000.0);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK_THROWS_AS(build_transition(p, 0.1, 0.2), InvalidInput);
}

TEST_CASE("profile CSV has a header and one row per node") {
  const ProfileSolution p = solve_profile(make_potential("at2"), 1.0, 0.1);
  const auto path = std::filesystem::temp_directory_path() / "rigidfield_profile_test.csv";
  write_profile_csv(path, p);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,w");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == static_cast<int>(p.w.size()));
  std::filesystem::remove(path);
}
