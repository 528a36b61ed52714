#include "rigidfield/harness.hpp"

#include "rigidfield/errors.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>

namespace rigidfield {

namespace {

double or_default(double v, double fallback) { return std::isnan(v) ? fallback : v; }

MatN identity(int n) { return MatN::Identity(n, n); }

VecN vec2(double a, double b) {
  VecN v(2);
  v << a, b;
  return v;
}

Polygon poly(std::initializer_list<Point> pts) { return Polygon{std::vector<Point>(pts)}; }

const Box kUnit{Point(0.0, 0.0), Point(1.0, 1.0)};

PolyhedralPartition vertical_split() {
  return PolyhedralPartition::polygons(kUnit, {poly({{0, 0}, {0.5, 0}, {0.5, 1}, {0, 1}}),
                                               poly({{0.5, 0}, {1, 0}, {1, 1}, {0.5, 1}})});
}

void dump_labels(const std::filesystem::path& path, const StructuredGrid& g, const std::vector<int>& labels) {
  // labels live on cells; the dump uses the grid of cell centres
  std::vector<double> xs, ys;
  for (int i = 0; i < g.nx(); ++i) xs.push_back(0.5 * (g.xs()[static_cast<std::size_t>(i)] + g.xs()[static_cast<std::size_t>(i) + 1]));
  if (g.dim() == 2)
    for (int j = 0; j < g.ny(); ++j) ys.push_back(0.5 * (g.ys()[static_cast<std::size_t>(j)] + g.ys()[static_cast<std::size_t>(j) + 1]));
  const StructuredGrid centres = StructuredGrid::rectilinear(xs, ys);
  dump_field(path, centres, 1, std::vector<double>(labels.begin(), labels.end()));
}

}  // namespace

Scenario build_scenario(const ExperimentConfig& c) {
  c.validate();
  Scenario sc;
  sc.name = c.scenario;
  const std::string& s = c.scenario;
  WellSpec well;
  if (s == "bar1d") {
    if (c.well != "rotation" && c.well != "skew") throw InvalidInput("bar1d: well must be rotation or skew");
    well = c.well == "rotation" ? WellSpec::rotations(1, c.alpha) : WellSpec::skew(1, c.alpha);
    // u(0) = 0 and u(1) = stretch; the broken bar keeps both halves rigid
    const double stretch = or_default(c.stretch, 2.0);
    const double slope = c.well == "rotation" ? 1.0 : 0.0;
    MatN a(1, 1);
    a(0, 0) = slope;
    VecN b0(1), b1(1);
    b0(0) = 0.0;
    b1(0) = stretch - slope;
    sc.target = {PolyhedralPartition::interval(0.0, 1.0, {0.5}), {{a, b0}, {a, b1}}, well};
  } else if (s == "two_piece_skew") {
    if (c.well != "skew") throw InvalidInput("two_piece_skew: model.well must be skew");
    well = WellSpec::skew(2, c.alpha);
    const double w = or_default(c.angle, 0.1);
    const double shift = or_default(c.stretch, 0.5);
    MatN W = MatN::Zero(2, 2);
    W(0, 1) = -w;
    W(1, 0) = w;
    sc.target = {vertical_split(), {{MatN::Zero(2, 2), vec2(0, 0)}, {W, vec2(shift, 0.0)}}, well};
  } else if (s == "two_wells") {
    const double stretch = or_default(c.stretch, 0.5);
    MatN B(2, 2);
    B << 1.0 + stretch, 0.0, 0.0, 0.75;
    well = WellSpec::finite_set({identity(2), B}, c.alpha);
    sc.target = {vertical_split(), {{identity(2), vec2(0, 0)}, {B, vec2(0.25, 0.0)}}, well};
  } else {
    if (c.well != "rotation") throw InvalidInput(s + ": model.well must be rotation");
    well = WellSpec::rotations(2, c.alpha);
    if (s == "two_piece_rotation") {
      const MatN R = rotation2(or_default(c.angle, 0.2));
      const VecN centre = vec2(0.5, 0.5);
      const VecN b = centre - R * centre + vec2(or_default(c.stretch, 0.25), 0.0);
      sc.target = {vertical_split(), {{identity(2), vec2(0, 0)}, {R, b}}, well};
    } else {
      const MatN R = rotation2(or_default(c.angle, std::numbers::pi / 6));
      PolyhedralPartition p;
      if (s == "crack2d_vertical") {
        p = vertical_split();
      } else if (s == "crack2d_diagonal") {
        p = PolyhedralPartition::polygons(kUnit, {poly({{0, 0}, {1, 0}, {1, 1}}), poly({{0, 0}, {1, 1}, {0, 1}})});
      } else {
        p = PolyhedralPartition::polygons(
            kUnit, {poly({{0, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}}),
                    poly({{0, 0}, {1, 0}, {1, 1}, {0.5, 1}, {0.5, 0.5}, {0, 0.5}})});
      }
      sc.target = {p, {{identity(2), vec2(0, 0)}, {R, vec2(0, 0)}}, well};
    }
  }
  sc.target.partition.validate();
  const MapReport rep = validate_map(sc.target);
  if (!rep.passed) throw InconsistencyError(s + ": built-in target is invalid: " + rep.issues.front());
  sc.model = EnergyModel::from_descriptor(well, c.model);
  return sc;
}

StructuredGrid solver_grid(const Scenario& sc, double eps, int cells_per_eps) {
  const Box& d = sc.target.partition.domain();
  const double h = eps / cells_per_eps;
  const int nx = std::max(2, static_cast<int>(std::ceil(d.width() / h - 1e-9)));
  if (sc.target.partition.dim() == 1) return StructuredGrid::uniform_1d(d.lo.x(), d.width(), nx);
  const int ny = std::max(2, static_cast<int>(std::ceil(d.height() / h - 1e-9)));
  return StructuredGrid::uniform_2d(d.lo, d.width(), d.height(), nx, ny);
}

BoundaryCondition grip_condition(const Scenario& sc, const StructuredGrid& g, bool pin_v) {
  const Box& d = sc.target.partition.domain();
  const double tol = 1e-12 * std::max(1.0, d.width());
  return BoundaryCondition::from_function(
      g, [&](const Point& x) { return std::abs(x.x() - d.lo.x()) <= tol || std::abs(x.x() - d.hi.x()) <= tol; },
      [&](const Point& x) { return eval_map(sc.target, x); }, pin_v);
}

std::vector<SweepRow> sweep(const ExperimentConfig& c, SweepArtifacts* artifacts) {
  const Scenario sc = build_scenario(c);
  const int n = sc.target.n();
  const double last_eps = c.eps_list.back();

  auto diagnose = [&](SweepRow& row, const PhaseFieldState& s) {
    CoareaReport co = coarea_lower_bound(s.grid, s.v, sc.model.potential, c.coarea_delta, c.coarea_levels);
    row.coarea_bound = co.bound;
    SegmentationResult seg = segment_rigid(s.grid, s.u, n, s.v, c.segment_threshold, sc.target.well);
    // components that are slivers of broken material are not pieces
    std::size_t pieces = 0;
    for (const auto& comp : seg.components) pieces += comp.fitted;
    row.pieces = static_cast<int>(pieces);
    if (artifacts && row.eps == last_eps) {
      artifacts->state = s;
      artifacts->coarea = std::move(co);
      artifacts->segmentation = std::move(seg);
    }
  };

  if (c.mode == RunMode::Recovery) {
    return limsup_sweep(sc.target, sc.model, c.eps_list, c.sweep_options(),
                        [&](SweepRow& row, const PhaseFieldState& s, const RecoveryLayers&) { diagnose(row, s); });
  }

  const double limit = limit_energy(sc.target, sc.model);
  std::vector<SweepRow> rows;
  for (double eps : c.eps_list) {
    const Schedule sch{eps, c.kappa, c.rho};
    sch.validate();
    const StructuredGrid g = solver_grid(sc, eps, c.grid.cells_per_eps);
    const BoundaryCondition bc = grip_condition(sc, g, c.pin_v);
    SolveResult res = alternate_minimize(initial_state(g, bc, n), sc.model, sch, bc, c.solver);
    SweepRow row;
    row.eps = eps;
    row.k_eps = sch.k_eps();
    row.xi_eps = sch.xi_eps();
    row.energy = res.report.final;
    row.limit = limit;
    row.rel_gap = limit > 0.0 ? std::abs(row.energy.total - limit) / limit : std::abs(row.energy.total);
    diagnose(row, res.state);
    if (artifacts)
      artifacts->solver_runs.push_back(
          {res.report.iterations, res.report.converged, res.report.min_v, res.report.max_v});
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "eps,k_eps,xi_eps,bulk,potential,gradient,total,limit,rel_gap,overlap_measure,coarea_bound,pieces\n";
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  for (const auto& r : rows)
    out << num(r.eps) << ',' << num(r.k_eps) << ',' << num(r.xi_eps) << ',' << num(r.energy.bulk) << ','
        << num(r.energy.potential) << ',' << num(r.energy.surface_gradient) << ',' << num(r.energy.total) << ','
        << num(r.limit) << ',' << num(r.rel_gap) << ',' << num(r.overlap) << ',' << num(r.coarea_bound) << ','
        << r.pieces << '\n';
}

void run_scenario(const ExperimentConfig& c, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  SweepArtifacts art;
  const std::vector<SweepRow> rows = sweep(c, &art);
  std::filesystem::create_directories(c.out_dir);
  {
    std::ofstream csv(c.out_dir / "sweep.csv");
    if (!csv) throw InvalidInput("run: cannot write " + (c.out_dir / "sweep.csv").string());
    write_sweep_csv(csv, rows);
  }
  nlohmann::json summary{{"scenario", c.scenario},
                         {"mode", mode_name(c.mode)},
                         {"kappa", c.kappa},
                         {"rho", c.rho},
                         {"eps_list", c.eps_list},
                         {"deterministic", c.deterministic},
                         {"seed", c.seed}};
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    nlohmann::json e{{"eps", r.eps},       {"total", r.energy.total}, {"limit", r.limit},
                     {"rel_gap", r.rel_gap}, {"coarea_bound", r.coarea_bound}, {"pieces", r.pieces}};
    if (k < art.solver_runs.size()) {
      const auto& s = art.solver_runs[k];
      e["iterations"] = s.iterations;
      e["converged"] = s.converged;
      e["min_v"] = s.min_v;
      e["max_v"] = s.max_v;
    }
    table.push_back(e);
  }
  summary["rows"] = table;
  if (art.coarea) summary["coarea"] = *art.coarea;
  if (art.segmentation) summary["segmentation"] = *art.segmentation;
  if (!c.deterministic)
    summary["elapsed_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  {
    std::ofstream js(c.out_dir / "summary.json");
    js << summary.dump(2) << '\n';
  }
  if (c.dump_fields && art.state) {
    const auto& s = *art.state;
    dump_field(c.out_dir / "u.pfld", s.grid, s.components, s.u);
    dump_field(c.out_dir / "v.pfld", s.grid, 1, s.v);
    if (art.segmentation) dump_labels(c.out_dir / "labels.pfld", s.grid, art.segmentation->labels);
  }
  log << "wrote " << rows.size() << " rows to " << (c.out_dir / "sweep.csv").string() << '\n';
}

int report_failure(const std::exception& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  if (dynamic_cast<const InvalidInput*>(&e) || dynamic_cast<const CorruptFile*>(&e)) return kExitInvalid;
  if (dynamic_cast<const NumericalFailure*>(&e)) return kExitNumerical;
  return kExitInternal;
}

}  // namespace rigidfield
