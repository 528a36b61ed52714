#include "rigidfield/errors.hpp"
#include "rigidfield/harness.hpp"
#include "rigidfield/recovery.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace rigidfield;

namespace {

Polygon poly(std::initializer_list<Point> pts) { return Polygon{std::vector<Point>(pts)}; }

PiecewiseRigidMap vertical_crack(double angle) {
  auto part = PolyhedralPartition::polygons(
      Box{}, {poly({{0, 0}, {0.5, 0}, {0.5, 1}, {0, 1}}), poly({{0.5, 0}, {1, 0}, {1, 1}, {0.5, 1}})});
  return PiecewiseRigidMap{part,
                           {RigidMotion{MatN::Identity(2, 2), VecN::Zero(2)}, RigidMotion{rotation2(angle), VecN::Zero(2)}},
                           WellSpec::rotations(2)};
}

const ProfileSolution& profile() {
  static const ProfileSolution p = solve_profile(make_potential("at2"), 8.0, 1e-3);
  return p;
}

struct Built {
  StructuredGrid grid;
  RecoveryV rv;
  std::vector<double> u;
};

Built build(const PiecewiseRigidMap& target, const EnergyModel& m, const Schedule& sch, GridRule rule = {}) {
  Built b;
  b.grid = recovery_grid(target, m, sch.eps, sch.xi_eps(), rule);
  b.rv = build_recovery_v(target, m, sch, profile(), b.grid);
  b.u = build_recovery_u(target, b.rv.layers, b.grid);
  return b;
}

}  // namespace

TEST_CASE("slabs are nested: A' in A in B, H and I disjoint") {
  const auto target = vertical_crack(0.5);
  const EnergyModel m = EnergyModel::at2(target.well);
  const Schedule sch{1.0 / 16, 1.0, 2.0};
  const Built b = build(target, m, sch);
  const RecoveryLayers& L = b.rv.layers;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.3, 0.7);
  for (int k = 0; k < 20000; ++k) {
    const Point x(U(rng), U(rng) * 2.5 - 0.75);
    if (L.in_A_prime(x)) CHECK(L.in_A(x));
    if (L.in_A(x)) CHECK(L.in_B(x));
    CHECK_FALSE((L.in_H(0, x) && L.in_I(0, x)));
    if (L.in_H(0, x) || L.in_I(0, x)) CHECK(L.in_B(0, x));
  }
}

TEST_CASE("recovery v follows the rescaled profile across the facet") {
  const auto target = vertical_crack(0.5);
  const EnergyModel m = EnergyModel::at2(target.well);
  const Schedule sch{1.0 / 16, 1.0, 2.0};
  const Built b = build(target, m, sch);
  const Transition h = build_transition(profile(), sch.eps, sch.xi_eps());
  int checked = 0;
  for (std::size_t k = 0; k < b.grid.node_count(); ++k) {
    const Point x = b.grid.node_point(k);
    if (std::abs(x.y() - 0.5) > 0.25) continue;  // well inside the facet, full cutoff
    CHECK(b.rv.v[k] == doctest::Approx(h(std::abs(x.x() - 0.5))).epsilon(1e-12));
    ++checked;
  }
  CHECK(checked > 100);
  // the two-sided layer puts the midpoint of the transition on the profile
  const double t = sch.xi_eps() + sch.eps * 4.0;
  const std::size_t i = static_cast<std::size_t>(std::lround(4.0 / profile().h));
  CHECK(h(t) == doctest::Approx(profile().w[i]).epsilon(1e-9));
}

TEST_CASE("recovery u equals the target outside A and vanishes in A'") {
  const auto target = vertical_crack(0.5);
  const EnergyModel m = EnergyModel::at2(target.well);
  const Schedule sch{1.0 / 32, 1.0, 2.0};
  const Built b = build(target, m, sch);
  const auto exact = sample_pr_map(b.grid, target);
  int in_a_prime = 0;
  for (std::size_t k = 0; k < b.grid.node_count(); ++k) {
    const Point x = b.grid.node_point(k);
    if (!b.rv.layers.in_A(x)) {
      CHECK(b.u[2 * k] == exact[2 * k]);
      CHECK(b.u[2 * k + 1] == exact[2 * k + 1]);
    }
    if (b.rv.layers.in_A_prime(x)) {
      CHECK(b.u[2 * k] == 0.0);
      CHECK(b.u[2 * k + 1] == 0.0);
      CHECK(b.rv.v[k] == 0.0);
      ++in_a_prime;
    }
  }
  CHECK(in_a_prime > 0);
}

TEST_CASE("recovery pair carries no bulk energy and approaches the limit") {
  const auto target = vertical_crack(0.5);
  const EnergyModel m = EnergyModel::at2(target.well);
  SweepOptions opt;
  const auto rows = limsup_sweep(target, m, {1.0 / 16, 1.0 / 32, 1.0 / 64}, opt);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.energy.bulk <= 1e-10 * r.k_eps);
    CHECK(r.limit == doctest::Approx(2.0));
    CHECK(r.pieces == 2);
  }
  CHECK(rows[1].rel_gap < rows[0].rel_gap);
  CHECK(rows[2].rel_gap < rows[1].rel_gap);
}

TEST_CASE("a crack-free target gives v = 1 and zero energy") {
  auto target = vertical_crack(0.0);
  const EnergyModel m = EnergyModel::at2(target.well);
  const auto rows = limsup_sweep(target, m, {1.0 / 16}, SweepOptions{});
  CHECK(rows[0].limit == 0.0);
  CHECK(rows[0].energy.total == doctest::Approx(0.0).scale(1.0));
  const Schedule sch{1.0 / 16, 1.0, 2.0};
  const Built b = build(target, m, sch);
  for (double v : b.rv.v) CHECK(v == 1.0);
}

TEST_CASE("under-resolved grids are rejected") {
  const auto target = vertical_crack(0.5);
  const EnergyModel m = EnergyModel::at2(target.well);
  const Schedule sch{1.0 / 16, 1.0, 2.0};
  GridRule coarse;
  coarse.refine_facets = false;
  coarse.cells_per_eps = 8;
  CHECK_THROWS_AS(build(target, m, sch, coarse), InvalidInput);
  GridRule few;
  few.cells_per_eps = 4;
  CHECK_THROWS_AS(recovery_grid(target, m, sch.eps, sch.xi_eps(), few), InvalidInput);
}

TEST_CASE("sweep rejects bad eps lists") {
  const auto target = vertical_crack(0.5);
  const EnergyModel m = EnergyModel::at2(target.well);
  CHECK_THROWS_AS(limsup_sweep(target, m, {1.0 / 32, 1.0 / 16}, SweepOptions{}), InvalidInput);
  CHECK_THROWS_AS(limsup_sweep(target, m, {}, SweepOptions{}), InvalidInput);
  CHECK_THROWS_AS(limsup_sweep(target, m, {-0.1}, SweepOptions{}), InvalidInput);
}

TEST_CASE("L-shaped crack: corner overlap shrinks linearly in eps") {
  ExperimentConfig c;
  c.scenario = "crack2d_lshape";
  const Scenario sc = build_scenario(c);
  const auto rows = limsup_sweep(sc.target, sc.model, {1.0 / 16, 1.0 / 32, 1.0 / 64}, SweepOptions{});
  for (std::size_t k = 0; k < rows.size(); ++k) CHECK(rows[k].overlap > 0.0);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double ratio = rows[k].overlap / rows[k - 1].overlap;
    CHECK(ratio < 0.3);  // O(eps^2) area: about 1/4 per halving
  }
  CHECK(rows.back().overlap / rows.back().eps < rows.front().overlap / rows.front().eps);
}
