#include "rigidfield/recovery.hpp"

#include "rigidfield/errors.hpp"
#include "rigidfield/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace rigidfield {

double FacetLayer::distance(const Point& x) const { return std::abs((x - origin).dot(normal)) / scale; }

double FacetLayer::inplane(const Point& x) const {
  if (length == 0.0) return 0.0;
  const double t = (x - origin).dot(tangent);
  return std::max({0.0, t - length, -t});
}

RecoveryLayers::RecoveryLayers(std::vector<FacetLayer> facets, double eps, double xi, double outer)
    : facets_(std::move(facets)), eps_(eps), xi_(xi), outer_(outer) {}

bool RecoveryLayers::in_A(std::size_t i, const Point& x) const {
  const auto& f = facets_.at(i);
  return f.inplane(x) <= eps_ && f.distance(x) <= xi_;
}

bool RecoveryLayers::in_A_prime(std::size_t i, const Point& x) const {
  const auto& f = facets_.at(i);
  return f.inplane(x) <= 0.5 * eps_ && f.distance(x) <= 0.5 * xi_;
}

bool RecoveryLayers::in_B(std::size_t i, const Point& x) const {
  const auto& f = facets_.at(i);
  return f.inplane(x) <= 2.0 * eps_ && f.distance(x) <= outer_;
}

bool RecoveryLayers::in_H(std::size_t i, const Point& x) const {
  const auto& f = facets_.at(i);
  const double d = f.distance(x);
  return f.inplane(x) <= eps_ && d > xi_ && d <= outer_;
}

bool RecoveryLayers::in_I(std::size_t i, const Point& x) const {
  const auto& f = facets_.at(i);
  const double r = f.inplane(x);
  return r > eps_ && r <= 2.0 * eps_ && f.distance(x) <= outer_;
}

bool RecoveryLayers::in_A(const Point& x) const {
  for (std::size_t i = 0; i < facets_.size(); ++i)
    if (in_A(i, x)) return true;
  return false;
}

bool RecoveryLayers::in_A_prime(const Point& x) const {
  for (std::size_t i = 0; i < facets_.size(); ++i)
    if (in_A_prime(i, x)) return true;
  return false;
}

bool RecoveryLayers::in_B(const Point& x) const { return b_count(x) > 0; }

int RecoveryLayers::b_count(const Point& x) const {
  int n = 0;
  for (std::size_t i = 0; i < facets_.size(); ++i) n += in_B(i, x);
  return n;
}

namespace {

double facet_scale(const JumpFacet& f, const EnergyModel& m) {
  if (!m.finsler) return 1.0;
  const double s = (*m.finsler)(0.5 * (f.a + f.b), f.normal);
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("recovery: Finsler norm must be positive on facet normals");
  return s;
}

std::vector<double> refine_axis(double lo, double hi, double h, const std::vector<std::pair<double, double>>& bands) {
  const int cells = std::max(2, static_cast<int>(std::ceil((hi - lo) / h - 1e-9)));
  std::vector<double> base(static_cast<std::size_t>(cells) + 1);
  for (int i = 0; i <= cells; ++i) base[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / cells;
  base.back() = hi;
  std::vector<double> inserted;
  for (const auto& [c, w] : bands) {
    for (double off : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      const double x = c + off * w;
      if (x > lo && x < hi) inserted.push_back(x);
    }
  }
  const double snap = 1e-6 * h;
  std::vector<double> out;
  for (double x : base) {
    bool drop = false;
    for (const auto& [c, w] : bands) drop = drop || (x > c - w && x < c + w && x != lo && x != hi);
    for (double y : inserted) drop = drop || std::abs(x - y) < snap;
    if (!drop) out.push_back(x);
  }
  out.insert(out.end(), inserted.begin(), inserted.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [&](double a, double b) { return b - a < snap; }), out.end());
  return out;
}

void check_grid_matches(const StructuredGrid& g, const PolyhedralPartition& p) {
  const Box gb = g.bounds();
  const Box& d = p.domain();
  const double tol = 1e-12 * std::max(1.0, d.width());
  if (g.dim() != p.dim() || std::abs(gb.lo.x() - d.lo.x()) > tol || std::abs(gb.hi.x() - d.hi.x()) > tol ||
      (g.dim() == 2 && (std::abs(gb.lo.y() - d.lo.y()) > tol || std::abs(gb.hi.y() - d.hi.y()) > tol)))
    throw InvalidInput("recovery: grid does not cover the partition domain");
}

double ramp(double x, double full, double zero) {
  if (x <= full) return 1.0;
  if (x >= zero) return 0.0;
  return (zero - x) / (zero - full);
}

}  // namespace

StructuredGrid recovery_grid(const PiecewiseRigidMap& u, const EnergyModel& m, double eps, double xi,
                             const GridRule& rule) {
  if (rule.cells_per_eps < 8) throw InvalidInput("grid_rule: need at least 8 cells per eps");
  if (!(eps > 0.0) || !(xi > 0.0)) throw InvalidInput("grid_rule: eps and xi must be positive");
  const Box& d = u.partition.domain();
  const double h = eps / rule.cells_per_eps;
  std::vector<std::pair<double, double>> xb, yb;
  if (rule.refine_facets) {
    for (const auto& f : jump_facets(u)) {
      const double w = facet_scale(f, m) * xi;
      if (u.partition.dim() == 1 || std::abs(f.normal.y()) < 1e-12)
        xb.emplace_back(f.a.x(), w);
      else if (std::abs(f.normal.x()) < 1e-12)
        yb.emplace_back(f.a.y(), w);
    }
  }
  if (u.partition.dim() == 1) return StructuredGrid::rectilinear(refine_axis(d.lo.x(), d.hi.x(), h, xb));
  return StructuredGrid::rectilinear(refine_axis(d.lo.x(), d.hi.x(), h, xb), refine_axis(d.lo.y(), d.hi.y(), h, yb));
}

RecoveryLayers make_layers(const PiecewiseRigidMap& u, const EnergyModel& m, const StructuredGrid& g,
                           const Transition& h) {
  check_grid_matches(g, u.partition);
  const double eps = h.eps(), xi = h.xi();
  if (eps < 8.0 * g.max_h() * (1.0 - 1e-12))
    throw InvalidInput("build_recovery_v: eps is under-resolved (need eps >= 8 max(hx, hy))");
  std::vector<FacetLayer> layers;
  for (const auto& f : jump_facets(u)) {
    FacetLayer L;
    L.facet = f;
    L.origin = f.a;
    L.normal = f.normal;
    L.length = (f.b - f.a).norm();
    L.tangent = L.length > 0.0 ? Point((f.b - f.a) / L.length) : Point(0.0, 1.0);
    L.scale = facet_scale(f, m);
    const double nx = std::abs(L.normal.x()), ny = std::abs(L.normal.y());
    const double tx = std::abs(L.tangent.x()), ty = std::abs(L.tangent.y());
    const std::size_t rows = g.dim() == 1 ? 1 : static_cast<std::size_t>(g.ny());
    std::vector<std::pair<double, double>> ext(rows, {0.0, 0.0});
    parallel_for(rows, [&](std::size_t j) {
      const double y0 = g.dim() == 1 ? 0.0 : g.ys()[j];
      const double y1 = g.dim() == 1 ? 0.0 : g.ys()[j + 1];
      const double hy = g.dim() == 1 ? 0.0 : g.hy(j);
      for (std::size_t i = 0; i < static_cast<std::size_t>(g.nx()); ++i) {
        double smin = 1e300, smax = -1e300, tmin = 1e300, tmax = -1e300;
        for (double x : {g.xs()[i], g.xs()[i + 1]})
          for (double y : {y0, y1}) {
            const Point r = Point(x, y) - L.origin;
            const double s = r.dot(L.normal), t = r.dot(L.tangent);
            smin = std::min(smin, s);
            smax = std::max(smax, s);
            tmin = std::min(tmin, t);
            tmax = std::max(tmax, t);
          }
        const double dn = std::max({0.0, smin, -smax});
        const double dt = L.length > 0.0 ? std::max({0.0, tmin - L.length, -tmax}) : 0.0;
        if (dn >= L.scale * xi * (1.0 - 1e-9) || dt >= eps * (1.0 - 1e-9)) continue;
        ext[j].first = std::max(ext[j].first, nx * g.hx(i) + ny * hy);
        ext[j].second = std::max(ext[j].second, tx * g.hx(i) + ty * hy);
      }
    });
    for (const auto& e : ext) {
      L.normal_extent = std::max(L.normal_extent, e.first);
      L.tangent_extent = std::max(L.tangent_extent, e.second);
    }
    if (L.scale * xi < 2.0 * L.normal_extent * (1.0 - 1e-9))
      throw InvalidInput("build_recovery_v: xi_eps is under-resolved near a facet (need two cells across xi_eps)");
    layers.push_back(L);
  }
  return RecoveryLayers(std::move(layers), eps, xi, h.outer());
}

RecoveryV build_recovery_v(const PiecewiseRigidMap& u, const EnergyModel& m, const Schedule& sch,
                           const ProfileSolution& profile, const StructuredGrid& g) {
  sch.validate();
  const Transition tr(profile, sch.eps, sch.xi_eps());
  RecoveryV out;
  out.layers = make_layers(u, m, g, tr);
  const auto& layers = out.layers;
  const double eps = sch.eps;
  out.v.assign(g.node_count(), 1.0);
  const std::size_t rows = g.nodes_y();
  parallel_for(rows, [&](std::size_t j) {
    for (std::size_t i = 0; i < g.nodes_x(); ++i) {
      const std::size_t k = g.node(i, j);
      const Point x = g.node_point(k);
      double v = 1.0;
      for (const auto& f : layers.facets()) {
        const double gamma = std::clamp((2.0 * eps - f.inplane(x)) / eps, 0.0, 1.0);
        if (gamma == 0.0) continue;
        v = std::min(v, 1.0 - gamma * (1.0 - tr(f.distance(x))));
      }
      out.v[k] = std::clamp(v, 0.0, 1.0);
    }
  });
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const Point x = g.node_point(k);
    if (out.v[k] != 0.0 && layers.in_A(x))
      throw InconsistencyError("build_recovery_v: v is not 0 on the inner slab");
    if (out.v[k] != 1.0 && !layers.in_B(x)) throw InconsistencyError("build_recovery_v: v is not 1 outside the layers");
  }
  return out;
}

std::vector<double> build_recovery_u(const PiecewiseRigidMap& u, const RecoveryLayers& layers,
                                     const StructuredGrid& g) {
  check_grid_matches(g, u.partition);
  std::vector<double> out = sample_pr_map(g, u);
  const auto c = static_cast<std::size_t>(u.n());
  const double eps = layers.eps(), xi = layers.xi();
  parallel_for(g.nodes_y(), [&](std::size_t j) {
    for (std::size_t i = 0; i < g.nodes_x(); ++i) {
      const std::size_t k = g.node(i, j);
      const Point x = g.node_point(k);
      double phi = 0.0;
      for (const auto& f : layers.facets()) {
        const double rn = std::max(0.5 * xi, xi - f.normal_extent / f.scale);
        const double rt = std::max(0.5 * eps, eps - f.tangent_extent);
        phi = std::max(phi, ramp(f.distance(x), 0.5 * xi, rn) * ramp(f.inplane(x), 0.5 * eps, rt));
      }
      if (phi == 0.0) continue;
      for (std::size_t r = 0; r < c; ++r) out[k * c + r] *= 1.0 - phi;
    }
  });
  return out;
}

double overlap_measure(const StructuredGrid& g, const RecoveryLayers& layers) {
  if (layers.facets().size() < 2) return 0.0;
  const std::size_t rows = g.dim() == 1 ? 1 : static_cast<std::size_t>(g.ny());
  std::vector<double> part(rows, 0.0);
  parallel_for(rows, [&](std::size_t j) {
    for (std::size_t i = 0; i < static_cast<std::size_t>(g.nx()); ++i) {
      const double cy = g.dim() == 1 ? 0.0 : 0.5 * (g.ys()[j] + g.ys()[j + 1]);
      const Point centre(0.5 * (g.xs()[i] + g.xs()[i + 1]), cy);
      if (layers.b_count(centre) >= 2) part[j] += g.hx(i) * g.hy(j);
    }
  });
  double total = 0.0;
  for (double p : part) total += p;
  return total;
}

std::vector<SweepRow> limsup_sweep(const PiecewiseRigidMap& u, const EnergyModel& m, const std::vector<double>& eps_list,
                                   const SweepOptions& opt, const SweepHook& hook) {
  if (eps_list.empty()) throw InvalidInput("limsup_sweep: eps_list is empty");
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] > 0.0)) throw InvalidInput("limsup_sweep: eps_list must be positive");
    if (k > 0 && !(eps_list[k] < eps_list[k - 1])) throw InvalidInput("limsup_sweep: eps_list must be strictly decreasing");
  }
  const MapReport rep = validate_map(u);
  if (!rep.passed) throw InvalidInput("limsup_sweep: invalid target: " + rep.issues.front());
  const ProfileSolution profile = solve_profile(m.potential, opt.profile_T, opt.profile_h);
  const double limit = limit_energy(u, m);
  std::vector<SweepRow> rows;
  for (double eps : eps_list) {
    const Schedule sch{eps, opt.kappa, opt.rho};
    sch.validate();
    SweepRow row;
    row.eps = eps;
    row.k_eps = sch.k_eps();
    row.xi_eps = sch.xi_eps();
    row.limit = limit;
    PhaseFieldState s;
    s.grid = recovery_grid(u, m, eps, row.xi_eps, opt.grid);
    s.components = u.n();
    RecoveryV rv = build_recovery_v(u, m, sch, profile, s.grid);
    s.v = std::move(rv.v);
    s.u = build_recovery_u(u, rv.layers, s.grid);
    row.energy = assemble_energy(s, m, sch);
    row.rel_gap = limit > 0.0 ? std::abs(row.energy.total - limit) / limit : std::abs(row.energy.total);
    row.overlap = overlap_measure(s.grid, rv.layers);
    row.pieces = static_cast<int>(u.partition.piece_count());
    if (hook) hook(row, s, rv.layers);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rigidfield
