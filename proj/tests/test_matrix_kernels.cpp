#include "rigidfield/errors.hpp"
#include "rigidfield/matrix_kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace rigidfield;

namespace {

// Independent oracle: minimum over a fine angle grid.
double brute_dist2_so2(const MatN& a, int samples = 20000) {
  double best = 1e300;
  for (int k = 0; k < samples; ++k) {
    const double t = 2.0 * std::numbers::pi * k / samples;
    const double c = std::cos(t), s = std::sin(t);
    const double d = (a(0, 0) - c) * (a(0, 0) - c) + (a(0, 1) + s) * (a(0, 1) + s) + (a(1, 0) - s) * (a(1, 0) - s) +
                     (a(1, 1) - c) * (a(1, 1) - c);
    best = std::min(best, d);
  }
  return best;
}

MatN random_mat(std::mt19937_64& rng, int n, double scale = 2.0) {
  std::uniform_real_distribution<double> U(-scale, scale);
  MatN a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = U(rng);
  return a;
}

}  // namespace

TEST_CASE("rotations have zero distance to SO(2)") {
  const WellSpec so2 = WellSpec::rotations(2);
  for (double t : {0.0, 0.3, -1.2, 3.0}) CHECK(dist2_to_well(rotation2(t), so2) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("scaled identity distance has the closed form 2(s-1)^2") {
  const WellSpec so2 = WellSpec::rotations(2);
  for (double s : {0.0, 0.5, 2.0}) {
    MatN a = s * MatN::Identity(2, 2);
    CHECK(dist2_to_well(a, so2) == doctest::Approx(2.0 * (s - 1) * (s - 1)));
  }
}

TEST_CASE("reflection distance: diag(1,-1) is at squared distance 4 from every rotation") {
  MatN a(2, 2);
  a << 1, 0, 0, -1;
  CHECK(dist2_to_well(a, WellSpec::rotations(2)) == doctest::Approx(4.0));
  CHECK(brute_dist2_so2(a) == doctest::Approx(4.0));
}

TEST_CASE("dist2 to SO(2) agrees with an angle scan") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 200; ++k) {
    const MatN a = random_mat(rng, 2);
    CHECK(std::abs(dist2_to_well(a, WellSpec::rotations(2)) - brute_dist2_so2(a)) < 1e-6);
  }
}

TEST_CASE("nearest rotation is orthogonal with unit determinant and attains the distance") {
  std::mt19937_64 rng(11);
  for (int n : {2, 3}) {
    for (int k = 0; k < 50; ++k) {
      const MatN a = random_mat(rng, n);
      const MatN r = nearest_rotation(a);
      CHECK((r.transpose() * r - MatN::Identity(n, n)).norm() < 1e-12);
      CHECK(r.determinant() == doctest::Approx(1.0));
      CHECK((a - r).squaredNorm() == doctest::Approx(dist2_to_well(a, WellSpec::rotations(n))).epsilon(1e-10));
    }
  }
  CHECK(nearest_rotation(MatN::Constant(1, 1, 5.0))(0, 0) == 1.0);
}

TEST_CASE("SO(3) distance of a rotation is zero") {
  MatN r(3, 3);
  r << std::cos(0.4), -std::sin(0.4), 0, std::sin(0.4), std::cos(0.4), 0, 0, 0, 1;
  CHECK(dist2_to_well(r, WellSpec::rotations(3)) < 1e-24);
}

TEST_CASE("finite well uses the nearest member, lowest index on ties") {
  MatN a = MatN::Identity(2, 2), b = 2.0 * MatN::Identity(2, 2);
  const WellSpec w = WellSpec::finite_set({a, b});
  CHECK(dist2_to_well(1.5 * MatN::Identity(2, 2), w) == doctest::Approx(0.5));
  CHECK(project_to_well(1.5 * MatN::Identity(2, 2), w).isApprox(a));
  CHECK(project_to_well(1.9 * MatN::Identity(2, 2), w).isApprox(b));
}

TEST_CASE("linearised well measures the symmetric part") {
  MatN a(2, 2);
  a << 1, 2, 0, 3;
  const WellSpec w = WellSpec::skew(2);
  CHECK(dist2_to_well(a, w) == doctest::Approx(sym_part(a).squaredNorm()));
  CHECK(project_to_well(a, w).isApprox(skew_part(a)));
  MatN s(2, 2);
  s << 0, -0.7, 0.7, 0;
  CHECK(dist2_to_well(s, w) == 0.0);
}

TEST_CASE("rank-one connections") {
  MatN a = MatN::Identity(2, 2);
  MatN b = a;
  b(0, 1) = 0.5;  // simple shear
  CHECK(rank_one_connected(a, b));
  MatN c(2, 2);
  c << 1.5, 0, 0, 0.75;
  CHECK_FALSE(rank_one_connected(a, c));
  CHECK_FALSE(rank_one_connected(a, a));
}

TEST_CASE("coercivity margin is nonnegative on random samples") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const MatN a = random_mat(rng, 2, 4.0);
    VecN xi(2);
    xi << N(rng), N(rng);
    xi.normalize();
    CHECK(coercivity_margin(a, xi) >= -1e-10);
  }
}

TEST_CASE("bad inputs raise InvalidInput") {
  CHECK_THROWS_AS(WellSpec::rotations(4), InvalidInput);
  CHECK_THROWS_AS(WellSpec::rotations(2, 0.0), InvalidInput);
  CHECK_THROWS_AS(WellSpec::finite_set({}), InvalidInput);
  CHECK_THROWS_AS(dist2_to_well(MatN::Identity(3, 3), WellSpec::rotations(2)), InvalidInput);
  MatN nan = MatN::Identity(2, 2);
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(dist2_to_well(nan, WellSpec::rotations(2)), InvalidInput);
  VecN xi(2);
  xi << 1.0, 1.0;
  CHECK_THROWS_AS(coercivity_margin(MatN::Identity(2, 2), xi), InvalidInput);
}
