#include "rigidfield/solver.hpp"

#include "rigidfield/errors.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rigidfield {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr double kGauss[2] = {0.21132486540518711775, 0.78867513459481288225};

struct Qp {
  std::size_t nodes[4];
  int nn;
  double N[4];
  double dx[4];
  double dy[4];
  double w;
  Point x;
};

template <class F>
void for_each_qp(const StructuredGrid& g, F&& f) {
  Qp q{};
  if (g.dim() == 1) {
    q.nn = 2;
    for (std::size_t i = 0; i < static_cast<std::size_t>(g.nx()); ++i) {
      const double h = g.hx(i);
      q.nodes[0] = i;
      q.nodes[1] = i + 1;
      for (double xi : kGauss) {
        q.N[0] = 1.0 - xi;
        q.N[1] = xi;
        q.dx[0] = -1.0 / h;
        q.dx[1] = 1.0 / h;
        q.dy[0] = q.dy[1] = 0.0;
        q.w = 0.5 * h;
        q.x = Point(g.xs()[i] + xi * h, 0.0);
        f(q);
      }
    }
    return;
  }
  q.nn = 4;
  for (std::size_t j = 0; j < static_cast<std::size_t>(g.ny()); ++j) {
    const double hy = g.hy(j);
    for (std::size_t i = 0; i < static_cast<std::size_t>(g.nx()); ++i) {
      const double hx = g.hx(i);
      q.nodes[0] = g.node(i, j);
      q.nodes[1] = g.node(i + 1, j);
      q.nodes[2] = g.node(i, j + 1);
      q.nodes[3] = g.node(i + 1, j + 1);
      for (double eta : kGauss)
        for (double xi : kGauss) {
          q.N[0] = (1.0 - xi) * (1.0 - eta);
          q.N[1] = xi * (1.0 - eta);
          q.N[2] = (1.0 - xi) * eta;
          q.N[3] = xi * eta;
          q.dx[0] = -(1.0 - eta) / hx;
          q.dx[1] = (1.0 - eta) / hx;
          q.dx[2] = -eta / hx;
          q.dx[3] = eta / hx;
          q.dy[0] = -(1.0 - xi) / hy;
          q.dy[1] = -xi / hy;
          q.dy[2] = (1.0 - xi) / hy;
          q.dy[3] = xi / hy;
          q.w = 0.25 * hx * hy;
          q.x = Point(g.xs()[i] + xi * hx, g.ys()[j] + eta * hy);
          f(q);
        }
    }
  }
}

double interp(const Qp& q, const std::vector<double>& v) {
  double s = 0.0;
  for (int a = 0; a < q.nn; ++a) s += q.N[a] * v[q.nodes[a]];
  return s;
}

// Row-major n x n gradient of the interleaved field u at q.
void grad_u(const Qp& q, const std::vector<double>& u, int n, double* f) {
  const auto c = static_cast<std::size_t>(n);
  for (int r = 0; r < n; ++r) {
    double gx = 0.0, gy = 0.0;
    for (int a = 0; a < q.nn; ++a) {
      const double val = u[q.nodes[a] * c + static_cast<std::size_t>(r)];
      gx += q.dx[a] * val;
      gy += q.dy[a] * val;
    }
    f[r * n] = gx;
    if (n == 2) f[r * n + 1] = gy;
  }
}

// Well projection for n <= 2, row-major.
void project(const WellSpec& well, const double* f, int n, double* p) {
  if (well.kind == WellKind::SkewLinearised) {
    if (n == 1) {
      p[0] = 0.0;
      return;
    }
    const double s = 0.5 * (f[1] - f[2]);
    p[0] = 0.0;
    p[1] = s;
    p[2] = -s;
    p[3] = 0.0;
    return;
  }
  if (well.kind == WellKind::RotationGroup) {
    if (n == 1) {
      p[0] = 1.0;
      return;
    }
    const double a = f[0] + f[3], b = f[2] - f[1];
    const double r = std::hypot(a, b);
    if (r > 0.0) {
      p[0] = a / r;
      p[1] = -b / r;
      p[2] = b / r;
      p[3] = a / r;
      return;
    }
  }
  MatN m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = f[r * n + c];
  const MatN pm = project_to_well(m, well);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) p[r * n + c] = pm(r, c);
}

double phi_of(const EnergyModel& m, double v) { return m.quadratic_in_v ? v * v : m.degradation(v); }

std::vector<long> free_map(std::size_t nodes, const std::vector<std::size_t>& fixed, std::size_t& free_count) {
  std::vector<long> map(nodes, 0);
  for (auto n : fixed) map[n] = -1;
  free_count = 0;
  for (auto& m : map)
    if (m == 0) m = static_cast<long>(free_count++);
    else m = -1;
  return map;
}

Eigen::VectorXd cg_solve(const SpMat& A, const Eigen::VectorXd& b, const Eigen::VectorXd& guess, double tol,
                         SolveReport* report, const char* who) {
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(std::max<Eigen::Index>(2000, 20 * A.rows()));
  cg.compute(A);
  Eigen::VectorXd x = cg.solveWithGuess(b, guess);
  if (!x.allFinite() || (cg.info() != Eigen::Success && cg.error() > 100.0 * tol)) {
    std::ostringstream os;
    os << who << ": conjugate gradients failed (relative residual " << cg.error() << " after " << cg.iterations()
       << " iterations)";
    throw NumericalFailure(os.str());
  }
  if (report) report->residuals.push_back(cg.error());
  return x;
}

void track_v(const PhaseFieldState& s, SolveReport* report) {
  if (!report) return;
  const auto [lo, hi] = std::minmax_element(s.v.begin(), s.v.end());
  report->min_v = std::min(report->min_v, *lo);
  report->max_v = std::max(report->max_v, *hi);
}

}  // namespace

BoundaryCondition BoundaryCondition::from_function(const StructuredGrid& g,
                                                   const std::function<bool(const Point&)>& select,
                                                   const std::function<VecN(const Point&)>& value, bool pin_v) {
  BoundaryCondition bc;
  bc.pin_v = pin_v;
  for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
    const Point x = g.node_point(idx);
    if (g.on_boundary(idx) && select(x)) {
      bc.nodes.push_back(idx);
      bc.values.push_back(value(x));
    }
  }
  return bc;
}

void BoundaryCondition::validate(const StructuredGrid& g, int components) const {
  if (nodes.size() != values.size()) throw InvalidInput("boundary condition: node/value count mismatch");
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k] >= g.node_count() || !g.on_boundary(nodes[k]))
      throw InvalidInput("boundary condition: prescribed node is not on the boundary");
    if (values[k].size() != components || !values[k].allFinite())
      throw InvalidInput("boundary condition: bad prescribed value");
  }
}

PhaseFieldState initial_state(const StructuredGrid& g, const BoundaryCondition& bc, int components) {
  bc.validate(g, components);
  PhaseFieldState s = PhaseFieldState::make(g, components);
  const int d = g.dim();
  const auto c = static_cast<std::size_t>(components);
  if (!bc.empty()) {
    // Least-squares affine fit u ~ A x + b of the boundary data.
    Eigen::MatrixXd X(static_cast<Eigen::Index>(bc.nodes.size()), d + 1);
    Eigen::MatrixXd Y(static_cast<Eigen::Index>(bc.nodes.size()), components);
    for (std::size_t k = 0; k < bc.nodes.size(); ++k) {
      const Point x = g.node_point(bc.nodes[k]);
      const auto r = static_cast<Eigen::Index>(k);
      for (int a = 0; a < d; ++a) X(r, a) = x(a);
      X(r, d) = 1.0;
      for (int q = 0; q < components; ++q) Y(r, q) = bc.values[k](q);
    }
    const Eigen::MatrixXd coef = X.completeOrthogonalDecomposition().solve(Y);
    for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
      const Point x = g.node_point(idx);
      for (int q = 0; q < components; ++q) {
        double val = coef(d, q);
        for (int a = 0; a < d; ++a) val += coef(a, q) * x(a);
        s.u[idx * c + static_cast<std::size_t>(q)] = val;
      }
    }
    for (std::size_t k = 0; k < bc.nodes.size(); ++k)
      for (int q = 0; q < components; ++q) s.u[bc.nodes[k] * c + static_cast<std::size_t>(q)] = bc.values[k](q);
  }
  return s;
}

void v_step(PhaseFieldState& s, const EnergyModel& m, const Schedule& sch, const BoundaryCondition& bc,
            SolveReport* report, const SolveOptions& opt) {
  if (!m.quadratic_in_v) throw InvalidInput("v_step: requires Phi(v) = v^2 and V(v) = (1-v)^2");
  double dxx = 1.0, dyy = 1.0;
  if (m.finsler) {
    if (m.descriptor.finsler == "ellipse") {
      dxx = m.descriptor.finsler_params.at(0) * m.descriptor.finsler_params.at(0);
      dyy = m.descriptor.finsler_params.at(1) * m.descriptor.finsler_params.at(1);
    } else if (m.descriptor.finsler != "euclid") {
      throw InvalidInput("v_step: the gradient term must be quadratic (euclid or ellipse Finsler norm)");
    }
  }
  const auto& g = s.grid;
  const int n = s.components;
  const double k = sch.k_eps(), eps = sch.eps;
  std::vector<std::size_t> fixed;
  if (bc.pin_v) fixed = bc.nodes;
  std::size_t nf = 0;
  const auto map = free_map(g.node_count(), fixed, nf);
  std::vector<double> vfix(g.node_count(), 0.0);
  for (auto idx : fixed) vfix[idx] = 1.0;

  std::vector<Triplet> trip;
  trip.reserve(g.cell_count() * 64);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nf));
  double f[9];
  for_each_qp(g, [&](const Qp& q) {
    grad_u(q, s.u, n, f);
    const double wq = m.default_bulk ? well_density(m.well, f, n) : [&] {
      MatN a(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) a(r, c) = f[r * n + c];
      return m.bulk(q.x, a);
    }();
    const double react = k * wq + 1.0 / eps;
    for (int a = 0; a < q.nn; ++a) {
      const long ra = map[q.nodes[a]];
      if (ra < 0) continue;
      rhs(ra) += q.w * q.N[a] / eps;
      for (int b = 0; b < q.nn; ++b) {
        const double val = q.w * (react * q.N[a] * q.N[b] + eps * (dxx * q.dx[a] * q.dx[b] + dyy * q.dy[a] * q.dy[b]));
        const long rb = map[q.nodes[b]];
        if (rb < 0)
          rhs(ra) -= val * vfix[q.nodes[b]];
        else
          trip.emplace_back(ra, rb, val);
      }
    }
  });
  SpMat A(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nf));
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd guess(static_cast<Eigen::Index>(nf));
  for (std::size_t idx = 0; idx < g.node_count(); ++idx)
    if (map[idx] >= 0) guess(map[idx]) = s.v[idx];
  const Eigen::VectorXd x = cg_solve(A, rhs, guess, opt.cg_tol, report, "v_step");
  for (std::size_t idx = 0; idx < g.node_count(); ++idx)
    s.v[idx] = map[idx] >= 0 ? std::clamp(x(map[idx]), 0.0, 1.0) : vfix[idx];
  track_v(s, report);
}

double bulk_energy(const PhaseFieldState& s, const EnergyModel& m, const Schedule& sch, std::vector<double>* gradient) {
  if (gradient && !m.default_bulk) throw InvalidInput("bulk_energy: gradient needs W = alpha dist^2(., well)");
  const int n = s.components;
  const auto c = static_cast<std::size_t>(n);
  const double k = sch.k_eps();
  if (gradient) gradient->assign(s.u.size(), 0.0);
  double e = 0.0;
  double f[9], p[9];
  for_each_qp(s.grid, [&](const Qp& q) {
    const double ph = phi_of(m, interp(q, s.v));
    if (ph == 0.0) return;
    grad_u(q, s.u, n, f);
    double w;
    if (m.default_bulk) {
      w = well_density(m.well, f, n);
    } else {
      MatN a(n, n);
      for (int r = 0; r < n; ++r)
        for (int cc = 0; cc < n; ++cc) a(r, cc) = f[r * n + cc];
      w = m.bulk(q.x, a);
    }
    e += q.w * k * ph * w;
    if (!gradient) return;
    project(m.well, f, n, p);
    const double scale = q.w * k * ph * 2.0 * m.alpha();
    for (int a = 0; a < q.nn; ++a)
      for (int r = 0; r < n; ++r) {
        double dot = (f[r * n] - p[r * n]) * q.dx[a];
        if (n == 2) dot += (f[r * n + 1] - p[r * n + 1]) * q.dy[a];
        (*gradient)[q.nodes[a] * c + static_cast<std::size_t>(r)] += scale * dot;
      }
  });
  return e;
}

void u_step(PhaseFieldState& s, const EnergyModel& m, const Schedule& sch, const BoundaryCondition& bc,
            SolveReport* report, const SolveOptions& opt) {
  if (!m.default_bulk) throw InvalidInput("u_step: requires W = alpha dist^2(., well)");
  const auto& g = s.grid;
  const int n = s.components;
  const auto c = static_cast<std::size_t>(n);
  const double k = sch.k_eps();
  bc.validate(g, n);
  for (std::size_t t = 0; t < bc.nodes.size(); ++t)
    for (int r = 0; r < n; ++r) s.u[bc.nodes[t] * c + static_cast<std::size_t>(r)] = bc.values[t](r);
  std::size_t nf = 0;
  const auto map = free_map(g.node_count(), bc.nodes, nf);
  const bool linear = m.well.kind == WellKind::SkewLinearised;
  const auto nfi = static_cast<Eigen::Index>(nf);

  // Quadratic model: int c_q |grad u - P_q|^2 (rotation / finite wells, one
  // scalar Laplacian shared by all components) or int c_q |e(u)|^2 (skew well).
  std::vector<double> coef;
  coef.reserve(g.cell_count() * 4);
  double cmax = 0.0;
  for_each_qp(g, [&](const Qp& q) {
    const double cq = k * m.alpha() * phi_of(m, interp(q, s.v));
    coef.push_back(cq);
    cmax = std::max(cmax, cq);
  });
  // Residual stiffness keeps the system definite where v vanishes on whole
  // cells; the step is still checked against the true energy.
  const double reg = 1e-12 * std::max(cmax, 1.0);

  SpMat K;
  {
    std::vector<Triplet> trip;
    std::size_t qi = 0;
    const Eigen::Index blocks = linear ? n : 1;
    K.resize(nfi * blocks, nfi * blocks);
    for_each_qp(g, [&](const Qp& q) {
      const double cq = coef[qi++] + reg;
      for (int a = 0; a < q.nn; ++a) {
        const long ra = map[q.nodes[a]];
        if (ra < 0) continue;
        for (int b = 0; b < q.nn; ++b) {
          const long rb = map[q.nodes[b]];
          if (rb < 0) continue;
          if (!linear) {
            trip.emplace_back(ra, rb, q.w * cq * (q.dx[a] * q.dx[b] + q.dy[a] * q.dy[b]));
            continue;
          }
          // sym grad of N_a e_r : sym grad of N_b e_t
          const double ga[2] = {q.dx[a], q.dy[a]}, gb[2] = {q.dx[b], q.dy[b]};
          for (int r = 0; r < n; ++r)
            for (int t = 0; t < n; ++t) {
              const double val = 0.5 * ((r == t ? (ga[0] * gb[0] + (n == 2 ? ga[1] * gb[1] : 0.0)) : 0.0) + ga[t] * gb[r]);
              trip.emplace_back(ra * n + r, rb * n + t, q.w * cq * val);
            }
        }
      }
    });
    K.setFromTriplets(trip.begin(), trip.end());
  }

  double energy = bulk_energy(s, m, sch);
  const int max_iter = linear ? 1 : opt.max_gauss_newton;
  for (int it = 0; it < max_iter; ++it) {
    // Right-hand side: model minimizer given the current projections and
    // the Dirichlet values.
    const Eigen::Index blocks = linear ? n : 1;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nfi * blocks, linear ? 1 : n);
    std::size_t qi = 0;
    double f[9], p[9];
    for_each_qp(g, [&](const Qp& q) {
      const double cq = coef[qi++] + reg;
      if (!linear) {
        grad_u(q, s.u, n, f);
        project(m.well, f, n, p);
      }
      for (int a = 0; a < q.nn; ++a) {
        const long ra = map[q.nodes[a]];
        if (ra < 0) continue;
        const double ga[2] = {q.dx[a], q.dy[a]};
        for (int b = 0; b < q.nn; ++b) {
          const long rb = map[q.nodes[b]];
          if (rb >= 0) continue;
          const double gb[2] = {q.dx[b], q.dy[b]};
          for (int r = 0; r < n; ++r)
            for (int t = 0; t < n; ++t) {
              const double ub = s.u[q.nodes[b] * c + static_cast<std::size_t>(t)];
              if (linear) {
                const double val = 0.5 * ((r == t ? (ga[0] * gb[0] + (n == 2 ? ga[1] * gb[1] : 0.0)) : 0.0) + ga[t] * gb[r]);
                rhs(ra * n + r, 0) -= q.w * cq * val * ub;
              } else if (r == t) {
                rhs(ra, r) -= q.w * cq * (ga[0] * gb[0] + ga[1] * gb[1]) * ub;
              }
            }
        }
        if (!linear)
          for (int r = 0; r < n; ++r) {
            double dot = p[r * n] * ga[0];
            if (n == 2) dot += p[r * n + 1] * ga[1];
            rhs(ra, r) += q.w * cq * dot;
          }
      }
    });

    std::vector<double> target = s.u;
    if (linear) {
      Eigen::VectorXd guess(nfi * n);
      for (std::size_t idx = 0; idx < g.node_count(); ++idx)
        if (map[idx] >= 0)
          for (int r = 0; r < n; ++r) guess(map[idx] * n + r) = s.u[idx * c + static_cast<std::size_t>(r)];
      const Eigen::VectorXd x = cg_solve(K, rhs.col(0), guess, opt.cg_tol, report, "u_step");
      for (std::size_t idx = 0; idx < g.node_count(); ++idx)
        if (map[idx] >= 0)
          for (int r = 0; r < n; ++r) target[idx * c + static_cast<std::size_t>(r)] = x(map[idx] * n + r);
    } else {
      for (int r = 0; r < n; ++r) {
        Eigen::VectorXd guess(nfi);
        for (std::size_t idx = 0; idx < g.node_count(); ++idx)
          if (map[idx] >= 0) guess(map[idx]) = s.u[idx * c + static_cast<std::size_t>(r)];
        const Eigen::VectorXd x = cg_solve(K, rhs.col(r), guess, opt.cg_tol, report, "u_step");
        for (std::size_t idx = 0; idx < g.node_count(); ++idx)
          if (map[idx] >= 0) target[idx * c + static_cast<std::size_t>(r)] = x(map[idx]);
      }
    }

    std::vector<double> grad;
    bulk_energy(s, m, sch, &grad);
    double slope = 0.0, gnorm2 = 0.0;
    for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
      if (map[idx] < 0) continue;
      for (std::size_t r = 0; r < c; ++r) {
        slope += grad[idx * c + r] * (target[idx * c + r] - s.u[idx * c + r]);
        gnorm2 += grad[idx * c + r] * grad[idx * c + r];
      }
    }
    if (std::sqrt(gnorm2) < 1e-9) break;
    if (slope >= 0.0) break;  // model step is not a descent direction: stationary to round-off

    double step = 1.0;
    bool accepted = false;
    std::vector<double> trial(s.u.size());
    double e_trial = energy;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t t = 0; t < s.u.size(); ++t) trial[t] = s.u[t] + step * (target[t] - s.u[t]);
      PhaseFieldState probe{g, n, trial, s.v};
      e_trial = bulk_energy(probe, m, sch);
      if (e_trial <= energy + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
      if (std::abs(step * slope) < 1e-16 * (1.0 + energy)) break;
    }
    if (!accepted) {
      if (std::abs(slope) < 1e-12 * (1.0 + energy)) break;
      std::ostringstream os;
      os << "u_step: line search failed (energy " << energy << ", slope " << slope << ", iteration " << it << ")";
      throw NumericalFailure(os.str(), s.u);
    }
    const double decrease = energy - e_trial;
    s.u.swap(trial);
    energy = e_trial;
    if (decrease < 1e-12 * (1.0 + std::abs(energy))) break;
  }
}

SolveResult alternate_minimize(const PhaseFieldState& init, const EnergyModel& m, const Schedule& sch,
                               const BoundaryCondition& bc, const SolveOptions& opt) {
  sch.validate();
  init.validate();
  SolveResult res{init, {}};
  auto& s = res.state;
  auto& rep = res.report;
  if (bc.pin_v)
    for (auto idx : bc.nodes) s.v[idx] = 1.0;
  track_v(s, &rep);
  double e = assemble_energy(s, m, sch).total;
  rep.trace.push_back(e);
  for (int outer = 1; outer <= opt.max_outer; ++outer) {
    const double e_start = e;
    u_step(s, m, sch, bc, &rep, opt);
    rep.trace.push_back(assemble_energy(s, m, sch).total);
    v_step(s, m, sch, bc, &rep, opt);
    e = assemble_energy(s, m, sch).total;
    rep.trace.push_back(e);
    rep.iterations = outer;
    if (e_start - e < opt.tol * (1.0 + std::abs(e))) {
      rep.converged = true;
      break;
    }
  }
  rep.final = assemble_energy(s, m, sch);
  return res;
}

}  // namespace rigidfield
