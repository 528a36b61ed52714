#include "rigidfield/diagnostics.hpp"
#include "rigidfield/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace rigidfield;

namespace {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Eigen::Vector2d(const Point&)>;

StructuredGrid unit(int n) { return StructuredGrid::uniform_2d(Point(0, 0), 1, 1, n, n); }

std::vector<double> nodal(const StructuredGrid& g, const ScalarField& f) {
  std::vector<double> out(g.node_count());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = f(g.node_point(k));
  return out;
}

std::vector<double> nodal2(const StructuredGrid& g, const VectorField& f) {
  std::vector<double> out(2 * g.node_count());
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const Eigen::Vector2d y = f(g.node_point(k));
    out[2 * k] = y(0);
    out[2 * k + 1] = y(1);
  }
  return out;
}

Eigen::Vector2d rigid(const MatN& R, double bx, double by, const Point& x) {
  return R * Eigen::Vector2d(x.x(), x.y()) + Eigen::Vector2d(bx, by);
}

}  // namespace

TEST_CASE("perimeter of a straight level line") {
  const auto g = unit(16);
  const auto v = nodal(g, [](const Point& x) { return x.x(); });
  for (double s : {0.1, 0.37, 0.5, 0.9}) CHECK(std::abs(sublevel_perimeter(g, v, s) - 1.0) <= 2.0 / 16);
  CHECK(sublevel_perimeter(g, nodal(g, [](const Point&) { return 1.0; }), 0.5) == 0.0);
}

TEST_CASE("perimeter of a circular level set") {
  const double r = 0.2;
  const auto g = unit(static_cast<int>(std::lround(32 / r)));
  const auto v = nodal(g, [&](const Point& x) { return std::min(1.0, (x - Point(0.5, 0.5)).norm() / (2 * r)); });
  const double p = sublevel_perimeter(g, v, 0.5);
  CHECK(std::abs(p - 2 * std::numbers::pi * r) <= 0.02 * 2 * std::numbers::pi * r);
}

TEST_CASE("1D perimeter counts crossings") {
  const auto g = StructuredGrid::uniform_1d(0.0, 1.0, 20);
  const auto v = nodal(g, [](const Point& x) { return std::abs(x.x() - 0.5) * 2.0; });
  CHECK(sublevel_perimeter(g, v, 0.5) == 2.0);
}

TEST_CASE("coarea bound of a linear ramp is 1 - 2 delta") {
  // Per({v < s}) = 1 for every s, so the bound is 2 int (1 - s) ds
  const auto g = unit(32);
  const auto v = nodal(g, [](const Point& x) { return x.x(); });
  const CoareaReport r = coarea_lower_bound(g, v, make_potential("at2"), 0.05, 32);
  CHECK(r.bound == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(r.levels.size() == 32);
  CHECK(r.lambda > 0.05);
  CHECK(r.lambda < 0.95);
  const CoareaReport flat = coarea_lower_bound(g, nodal(g, [](const Point&) { return 1.0; }), make_potential("at2"), 0.05);
  CHECK(flat.bound == 0.0);
  CHECK_THROWS_AS(coarea_lower_bound(g, v, make_potential("at2"), 0.6), InvalidInput);
}

TEST_CASE("Ambrosio modification") {
  const auto g = unit(8);
  const auto u = nodal2(g, [](const Point& x) { return Eigen::Vector2d(x.x() * 1.3, x.y()); });
  const RigidMotion id{MatN::Identity(2, 2), VecN::Zero(2)};
  const WellSpec so2 = WellSpec::rotations(2);
  const ModifiedField none = ambrosio_modification(g, u, 2, nodal(g, [](const Point&) { return 1.0; }), 0.5, id, so2);
  CHECK(none.u == u);
  CHECK(none.jump_proxy == 0.0);
  const auto v = nodal(g, [](const Point& x) { return x.x() < 0.5 ? 0.0 : 1.0; });
  const ModifiedField mod = ambrosio_modification(g, u, 2, v, 0.5, id, so2);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const Point x = g.node_point(k);
    if (x.x() < 0.5) {
      CHECK(mod.mask[k]);
      CHECK(mod.u[2 * k] == doctest::Approx(x.x()));
    } else {
      CHECK_FALSE(mod.mask[k]);
      CHECK(mod.u[2 * k] == u[2 * k]);
    }
  }
  CHECK(mod.jump_proxy == doctest::Approx(1.0));
  // the unmasked half keeps its stretch
  CHECK(well_defect_outside(g, mod.u, 2, mod.mask, so2) > 0.0);
  const RigidMotion off{1.5 * MatN::Identity(2, 2), VecN::Zero(2)};
  CHECK_THROWS_AS(ambrosio_modification(g, u, 2, v, 0.5, off, so2), InvalidInput);
}

TEST_CASE("slice counts of a translation jump and of an affine map") {
  const auto g = unit(32);
  const auto jump = nodal2(g, [](const Point& x) { return Eigen::Vector2d(x.x() + (x.x() > 0.5 ? 1.0 : 0.0), x.y()); });
  const SliceCounts c = slice_jump_counts(g, jump, 2, 0, 0.25, SliceField::Displacement);
  REQUIRE(c.counts.size() == 33);
  for (int n : c.counts) CHECK(n == 1);
  CHECK(c.integral == doctest::Approx(1.0));
  const SliceCounts across = slice_jump_counts(g, jump, 2, 1, 0.25, SliceField::Displacement);
  CHECK(across.integral == 0.0);
  const auto affine = nodal2(g, [](const Point& x) { return Eigen::Vector2d(2 * x.x() - x.y(), 3 * x.y()); });
  CHECK(slice_jump_counts(g, affine, 2, 0, 0.25, SliceField::Displacement).integral == 0.0);

  const auto v = nodal(g, [](const Point& x) { return std::min(1.0, std::abs(x.x() - 0.5) * 8.0); });
  const SliceCounts pv = slice_jump_counts(g, v, 1, 0, 0.1, SliceField::PhaseField);
  for (int n : pv.counts) CHECK(n == 1);
  CHECK(pv.integral == doctest::Approx(1.0));
}

TEST_CASE("segmentation of a single rigid motion") {
  const auto g = unit(10);
  const MatN R = rotation2(0.4);
  const auto u = nodal2(g, [&](const Point& x) { return rigid(R, 0.3, -0.2, x); });
  const auto v = nodal(g, [](const Point&) { return 1.0; });
  const SegmentationResult s = segment_rigid(g, u, 2, v, 0.5, WellSpec::rotations(2));
  REQUIRE(s.components.size() == 1);
  CHECK(s.fitted_count() == 1);
  CHECK(s.components[0].residual < 1e-12);
  CHECK((s.components[0].motion.A - R).norm() < 1e-12);
  CHECK(s.components[0].motion.b(0) == doctest::Approx(0.3));
  CHECK(s.components[0].area == doctest::Approx(1.0));
}

TEST_CASE("segmentation splits a two-piece map along the damaged band") {
  const auto g = unit(20);
  const MatN R = rotation2(0.5);
  const auto u = nodal2(g, [&](const Point& x) {
    return x.x() < 0.5 ? Eigen::Vector2d(x.x(), x.y()) : rigid(R, 0.1, 0.0, x);
  });
  const auto v = nodal(g, [](const Point& x) { return std::abs(x.x() - 0.5) < 0.08 ? 0.0 : 1.0; });
  const SegmentationResult s = segment_rigid(g, u, 2, v, 0.5, WellSpec::rotations(2));
  REQUIRE(s.components.size() == 2);
  CHECK(s.fitted_count() == 2);
  CHECK((s.components[0].motion.A - MatN::Identity(2, 2)).norm() < 1e-12);
  CHECK((s.components[1].motion.A - R).norm() < 1e-12);
  for (const auto& c : s.components) CHECK(c.residual < 1e-12);
  nlohmann::json j = s;
  CHECK(j.size() == 2);
  CHECK(j[1]["residual"].get<double>() < 1e-12);
}

TEST_CASE("segmentation fits skew and finite wells") {
  const auto g = unit(8);
  const auto v = nodal(g, [](const Point&) { return 1.0; });
  MatN W = MatN::Zero(2, 2);
  W(0, 1) = -0.2;
  W(1, 0) = 0.2;
  const auto u = nodal2(g, [&](const Point& x) { return rigid(W, 0.5, 0.1, x); });
  const SegmentationResult s = segment_rigid(g, u, 2, v, 0.5, WellSpec::skew(2));
  REQUIRE(s.components.size() == 1);
  CHECK((s.components[0].motion.A - W).norm() < 1e-12);
  MatN B(2, 2);
  B << 1.5, 0, 0, 0.75;
  const auto ub = nodal2(g, [&](const Point& x) { return rigid(B, 0.25, 0.0, x); });
  const SegmentationResult f = segment_rigid(g, ub, 2, v, 0.5, WellSpec::finite_set({MatN::Identity(2, 2), B}));
  CHECK((f.components[0].motion.A - B).norm() < 1e-12);
  CHECK(f.components[0].residual < 1e-12);
}

TEST_CASE("rigidity ratio") {
  const WellSpec so2 = WellSpec::rotations(2);
  {
    const auto g = unit(8);
    const auto u = nodal2(g, [](const Point& x) { return rigid(rotation2(1.0), 0.2, 0.0, x); });
    const RigidityRatio r = rigidity_ratio(g, u, 2, so2, 1.5);
    CHECK(r.lhs < 1e-9);
    CHECK(r.ratio == 0.0);
  }
  // a smooth non-rigid perturbation: the ratio is a property of the map,
  // so it must settle under refinement
  const auto bend = [](const Point& x) {
    return Eigen::Vector2d(x.x() + 0.05 * std::sin(3 * x.y()), x.y() + 0.04 * x.x() * x.x());
  };
  double prev = 0.0;
  for (int n : {16, 32, 64}) {
    const auto g = unit(n);
    const RigidityRatio r = rigidity_ratio(g, nodal2(g, bend), 2, so2, 1.5);
    CHECK(r.rhs <= r.lhs + 1e-10);
    CHECK(r.ratio > 1.0);
    if (prev > 0.0) CHECK(std::abs(r.ratio / prev - 1.0) < 0.2);
    prev = r.ratio;
  }
  const auto g = unit(8);
  CHECK_THROWS_AS(rigidity_ratio(g, nodal2(g, bend), 2, so2, 2.5), InvalidInput);
  MatN B(2, 2);
  B << 1.5, 0, 0, 0.75;
  const auto ub = nodal2(g, [&](const Point& x) { return rigid(B, 0.0, 0.0, x); });
  CHECK(rigidity_ratio(g, ub, 2, WellSpec::finite_set({MatN::Identity(2, 2), B}), 1.5).lhs < 1e-12);
}
