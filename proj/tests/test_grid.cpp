#include "rigidfield/errors.hpp"
#include "rigidfield/grid.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace rigidfield;

namespace {

PhaseFieldState affine_state(const StructuredGrid& g, const MatN& A, const std::function<double(const Point&)>& v) {
  PhaseFieldState s = PhaseFieldState::make(g, 2);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const Point x = g.node_point(k);
    const Eigen::Vector2d y = A * Eigen::Vector2d(x.x(), x.y());
    s.u[2 * k] = y(0);
    s.u[2 * k + 1] = y(1);
    s.v[k] = v(x);
  }
  return s;
}

std::filesystem::path tmp(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_CASE("grid geometry") {
  const auto g = StructuredGrid::uniform_2d(Point(0, 0), 2.0, 1.0, 4, 2);
  CHECK(g.node_count() == 15);
  CHECK(g.cell_count() == 8);
  CHECK(g.max_h() == doctest::Approx(0.5));
  CHECK(g.uniform());
  CHECK(g.on_boundary(0));
  CHECK_FALSE(g.on_boundary(g.node(2, 1)));
  const auto r = StructuredGrid::rectilinear({0.0, 0.1, 1.0});
  CHECK(r.dim() == 1);
  CHECK_FALSE(r.uniform());
  CHECK_THROWS_AS(StructuredGrid::rectilinear({0.0, 0.5, 0.4}), InvalidInput);
}

TEST_CASE("quadrature weights sum to the domain measure") {
  const auto g = StructuredGrid::rectilinear({0.0, 0.3, 1.0}, {0.0, 0.5, 0.6, 2.0});
  double s = 0.0;
  for (const auto& q : quadrature_points(g)) s += q.weight;
  CHECK(s == doctest::Approx(2.0));
}

TEST_CASE("rigid field with v = 1 has zero energy") {
  const auto g = StructuredGrid::uniform_2d(Point(0, 0), 1, 1, 8, 8);
  const auto s = affine_state(g, rotation2(0.7), [](const Point&) { return 1.0; });
  const EnergyModel m = EnergyModel::at2(WellSpec::rotations(2));
  const EnergyBreakdown e = assemble_energy(s, m, Schedule{0.1, 1.0, 2.0});
  CHECK(e.bulk < 1e-14);
  CHECK(e.potential < 1e-28);
  CHECK(e.surface_gradient == 0.0);
}

TEST_CASE("dilation: bulk = k alpha 2 (s-1)^2 |Omega|") {
  const auto g = StructuredGrid::uniform_2d(Point(0, 0), 1, 1, 4, 4);
  const auto s = affine_state(g, 1.2 * MatN::Identity(2, 2), [](const Point&) { return 1.0; });
  const EnergyModel m = EnergyModel::at2(WellSpec::rotations(2, 3.0));
  const Schedule sch{0.1, 1.0, 2.0};
  CHECK(assemble_energy(s, m, sch).bulk == doctest::Approx(10.0 * 3.0 * 2.0 * 0.04));
}

TEST_CASE("linear phase field: exact potential and gradient terms") {
  const auto g = StructuredGrid::rectilinear({0.0, 0.2, 0.25, 0.7, 1.0}, {0.0, 0.5, 1.0});
  const auto s = affine_state(g, MatN::Identity(2, 2), [](const Point& x) { return x.x(); });
  const double eps = 0.05;
  const EnergyBreakdown e = assemble_energy(s, EnergyModel::at2(WellSpec::rotations(2)), Schedule{eps, 1.0, 2.0});
  CHECK(e.potential == doctest::Approx(1.0 / (3.0 * eps)));
  CHECK(e.surface_gradient == doctest::Approx(eps));
  CHECK(e.total == doctest::Approx(e.bulk + e.potential + e.surface_gradient));
  // bulk: k int x^2 * 0 since the identity is in the well
  CHECK(e.bulk < 1e-20);
}

TEST_CASE("1D energies") {
  const auto g = StructuredGrid::uniform_1d(0.0, 1.0, 10);
  PhaseFieldState s = PhaseFieldState::make(g, 1);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    s.u[k] = 2.0 * g.node_point(k).x();
    s.v[k] = 0.5;
  }
  const EnergyBreakdown e = assemble_energy(s, EnergyModel::at2(WellSpec::rotations(1)), Schedule{0.5, 1.0, 2.0});
  // k = 2, Phi = 1/4, W = (2-1)^2; V = 1/4 over eps
  CHECK(e.bulk == doctest::Approx(0.5));
  CHECK(e.potential == doctest::Approx(0.5));
  CHECK(e.surface_gradient == 0.0);
}

TEST_CASE("sampling a piecewise rigid map") {
  const auto g = StructuredGrid::uniform_1d(0.0, 1.0, 4);
  PiecewiseRigidMap u{PolyhedralPartition::interval(0, 1, {0.5}),
                      {RigidMotion{MatN::Identity(1, 1), VecN::Zero(1)},
                       RigidMotion{MatN::Identity(1, 1), VecN::Constant(1, 1.0)}},
                      WellSpec::rotations(1)};
  const auto d = sample_pr_map(g, u);
  CHECK(d[1] == doctest::Approx(0.25));
  CHECK(d[2] == doctest::Approx(0.5));  // interface node stays on the left piece
  CHECK(d[3] == doctest::Approx(1.75));
}

TEST_CASE("field files round-trip bitwise") {
  const auto g = StructuredGrid::rectilinear({0.0, 0.1, 0.35, 1.0}, {0.0, 0.5, 1.0});
  std::vector<double> data(g.node_count() * 2);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = 1.0 / (3.0 + static_cast<double>(i));
  const auto path = tmp("rigidfield_roundtrip.pfld");
  dump_field(path, g, 2, data);
  const FieldFile f = load_field(path);
  CHECK(f.components == 2);
  CHECK(f.grid.xs() == g.xs());
  CHECK(f.grid.ys() == g.ys());
  CHECK(f.data == data);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(dump_field(path, g, 3, data), InvalidInput);
}

TEST_CASE("damaged field files raise CorruptFile") {
  const auto g = StructuredGrid::uniform_1d(0.0, 1.0, 4);
  const std::vector<double> data(g.node_count(), 0.5);
  const auto path = tmp("rigidfield_damaged.pfld");
  dump_field(path, g, 1, data);
  const auto size = std::filesystem::file_size(path);

  std::filesystem::resize_file(path, size - 3);
  CHECK_THROWS_AS(load_field(path), CorruptFile);

  dump_field(path, g, 1, data);
  { std::ofstream(path, std::ios::app | std::ios::binary) << "x"; }
  CHECK_THROWS_AS(load_field(path), CorruptFile);

  { std::ofstream(path, std::ios::binary) << "{not json\n"; }
  CHECK_THROWS_AS(load_field(path), CorruptFile);

  { std::ofstream(path, std::ios::binary) << R"({"n":1,"nx":4,"ny":0,"hx":0.25,"hy":0,"components":1,"count":7})" << '\n'; }
  CHECK_THROWS_AS(load_field(path), CorruptFile);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_field(tmp("rigidfield_missing.pfld")), InvalidInput);
}

TEST_CASE("energy totals do not depend on the worker count") {
  const auto g = StructuredGrid::uniform_2d(Point(0, 0), 1, 1, 64, 64);
  const auto s = affine_state(g, 1.1 * rotation2(0.2), [](const Point& x) { return 0.5 + 0.4 * std::sin(7 * x.x() * x.y()); });
  const EnergyModel m = EnergyModel::at2(WellSpec::rotations(2));
  const Schedule sch{0.05, 1.0, 2.0};
  setenv("RIGIDFIELD_THREADS", "1", 1);
  const EnergyBreakdown a = assemble_energy(s, m, sch);
  setenv("RIGIDFIELD_THREADS", "4", 1);
  const EnergyBreakdown b = assemble_energy(s, m, sch);
  unsetenv("RIGIDFIELD_THREADS");
  CHECK(a.bulk == b.bulk);
  CHECK(a.potential == b.potential);
  CHECK(a.surface_gradient == b.surface_gradient);
  CHECK(a.total == b.total);
}
