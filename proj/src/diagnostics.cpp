#include "rigidfield/diagnostics.hpp"

#include "rigidfield/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <string>

namespace rigidfield {

namespace {

void check_nodal(const StructuredGrid& g, const std::vector<double>& f, int components, const char* what) {
  if (f.size() != g.node_count() * static_cast<std::size_t>(components))
    throw InvalidInput(std::string(what) + ": field size does not match the grid");
}

PhaseFieldState state_of(const StructuredGrid& g, const std::vector<double>& u, int components) {
  if (components != g.dim()) throw InvalidInput("diagnostics: component count must equal the grid dimension");
  check_nodal(g, u, components, "diagnostics");
  PhaseFieldState s = PhaseFieldState::make(g, components);
  s.u = u;
  return s;
}

// Golden-section minimization of a unimodal function on [a, b].
template <class F>
double golden_min(F&& f, double a, double b, double tol) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double trapz(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) s += 0.5 * (x[k + 1] - x[k]) * (y[k] + y[k + 1]);
  return s;
}

}  // namespace

double sublevel_perimeter(const StructuredGrid& g, const std::vector<double>& v, double s) {
  check_nodal(g, v, 1, "sublevel_perimeter");
  if (g.dim() == 1) {
    double count = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
      if ((v[i] < s) != (v[i + 1] < s)) count += 1.0;
    return count;
  }
  const auto& xs = g.xs();
  const auto& ys = g.ys();
  double total = 0.0;
  for (std::size_t j = 0; j < static_cast<std::size_t>(g.ny()); ++j) {
    double row = 0.0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(g.nx()); ++i) {
      // corners counter-clockwise from (i, j); edge k joins corner k and k+1
      const std::size_t idx[4] = {g.node(i, j), g.node(i + 1, j), g.node(i + 1, j + 1), g.node(i, j + 1)};
      const Point p[4] = {{xs[i], ys[j]}, {xs[i + 1], ys[j]}, {xs[i + 1], ys[j + 1]}, {xs[i], ys[j + 1]}};
      double f[4];
      bool in[4];
      int inside = 0;
      for (int k = 0; k < 4; ++k) {
        f[k] = v[idx[k]];
        in[k] = f[k] < s;
        inside += in[k];
      }
      if (inside == 0 || inside == 4) continue;
      Point cross[4];
      for (int k = 0; k < 4; ++k) {
        const int l = (k + 1) % 4;
        if (in[k] != in[l]) cross[k] = p[k] + (s - f[k]) / (f[l] - f[k]) * (p[l] - p[k]);
      }
      const bool saddle = inside == 2 && in[0] == in[2];
      if (!saddle) {
        Point ends[2];
        int n = 0;
        for (int k = 0; k < 4; ++k)
          if (in[k] != in[(k + 1) % 4]) ends[n++] = cross[k];
        row += (ends[1] - ends[0]).norm();
        continue;
      }
      // asymptotic decider: the bilinear centre value picks which diagonal
      // pair is joined; the other two corners are cut off separately
      const bool centre_in = 0.25 * (f[0] + f[1] + f[2] + f[3]) < s;
      for (int k = 0; k < 4; ++k)
        if (in[k] != centre_in) row += (cross[(k + 3) % 4] - cross[k]).norm();
    }
    total += row;
  }
  return total;
}

CoareaReport coarea_lower_bound(const StructuredGrid& g, const std::vector<double>& v, const ScalarFn& potential,
                                double delta, int s_count) {
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidInput("coarea: delta must lie in (0, 1/2)");
  if (s_count < 3) throw InvalidInput("coarea: need at least 3 levels");
  CoareaReport r;
  std::vector<double> weight, weighted;
  for (int k = 0; k < s_count; ++k) {
    const double s = delta + (1.0 - 2.0 * delta) * k / (s_count - 1);
    const double per = sublevel_perimeter(g, v, s);
    const double w = std::sqrt(std::max(potential(s), 0.0));
    r.levels.push_back(s);
    r.perimeter.push_back(per);
    weight.push_back(w);
    weighted.push_back(w * per);
  }
  const double num = trapz(r.levels, weighted);
  const double den = trapz(r.levels, weight);
  r.bound = 2.0 * num;
  r.mean_perimeter = den > 0.0 ? num / den : 0.0;
  int pick = -1;
  for (int k = 1; k + 1 < s_count && pick < 0; ++k)
    if (r.perimeter[static_cast<std::size_t>(k)] <= r.mean_perimeter * (1.0 + 1e-12)) pick = k;
  if (pick < 0) {
    pick = 1;
    for (int k = 2; k + 1 < s_count; ++k)
      if (r.perimeter[static_cast<std::size_t>(k)] < r.perimeter[static_cast<std::size_t>(pick)]) pick = k;
  }
  r.lambda = r.levels[static_cast<std::size_t>(pick)];
  return r;
}

ModifiedField ambrosio_modification(const StructuredGrid& g, const std::vector<double>& u, int components,
                                    const std::vector<double>& v, double lambda, const RigidMotion& motion,
                                    const WellSpec& well) {
  check_nodal(g, u, components, "ambrosio_modification");
  check_nodal(g, v, 1, "ambrosio_modification");
  if (motion.A.rows() != components || motion.A.cols() != components || motion.b.size() != components)
    throw InvalidInput("ambrosio_modification: motion has the wrong dimension");
  if (dist2_to_well(motion.A, well) > 1e-10) throw InvalidInput("ambrosio_modification: A is not in the well");
  ModifiedField out;
  out.u = u;
  out.mask.assign(g.node_count(), 0);
  const auto c = static_cast<std::size_t>(components);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    if (!(v[k] < lambda)) continue;
    out.mask[k] = 1;
    const VecN y = motion.apply(g.node_point(k));
    for (std::size_t r = 0; r < c; ++r) out.u[k * c + r] = y(static_cast<Eigen::Index>(r));
  }
  out.jump_proxy = sublevel_perimeter(g, v, lambda);
  return out;
}

double well_defect_outside(const StructuredGrid& g, const std::vector<double>& u, int components,
                           const std::vector<char>& node_mask, const WellSpec& well) {
  if (node_mask.size() != g.node_count()) throw InvalidInput("well_defect_outside: mask size does not match the grid");
  const PhaseFieldState s = state_of(g, u, components);
  const auto grads = deformation_gradient(s);
  const auto qps = quadrature_points(g);
  const std::size_t per_cell = g.dim() == 1 ? 2 : 4;
  double total = 0.0;
  for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
    bool masked = false;
    if (g.dim() == 1) {
      masked = node_mask[cell] || node_mask[cell + 1];
    } else {
      const std::size_t i = cell % static_cast<std::size_t>(g.nx()), j = cell / static_cast<std::size_t>(g.nx());
      masked = node_mask[g.node(i, j)] || node_mask[g.node(i + 1, j)] || node_mask[g.node(i, j + 1)] ||
               node_mask[g.node(i + 1, j + 1)];
    }
    if (masked) continue;
    for (std::size_t q = cell * per_cell; q < (cell + 1) * per_cell; ++q)
      total += qps[q].weight * dist2_to_well(grads[q], well);
  }
  return total;
}

SliceCounts slice_jump_counts(const StructuredGrid& g, const std::vector<double>& field, int components, int axis,
                              double threshold, SliceField kind) {
  if (kind == SliceField::PhaseField && components != 1)
    throw InvalidInput("slice_jump_counts: a phase field has one component");
  check_nodal(g, field, components, "slice_jump_counts");
  if (axis < 0 || axis >= g.dim()) throw InvalidInput("slice_jump_counts: axis out of range");
  if (!(threshold > 0.0)) throw InvalidInput("slice_jump_counts: threshold must be positive");
  if (kind == SliceField::PhaseField && !(threshold < 1.0))
    throw InvalidInput("slice_jump_counts: phase-field threshold must lie in (0,1)");
  const auto c = static_cast<std::size_t>(components);
  const std::size_t lines = axis == 0 ? g.nodes_y() : g.nodes_x();
  const std::size_t along = axis == 0 ? g.nodes_x() : g.nodes_y();
  const std::vector<double>& across = axis == 0 ? g.ys() : g.xs();
  SliceCounts out;
  out.counts.assign(lines, 0);
  for (std::size_t l = 0; l < lines; ++l) {
    auto at = [&](std::size_t k) { return axis == 0 ? g.node(k, l) : g.node(l, k); };
    int count = 0;
    if (kind == SliceField::Displacement) {
      bool in_run = false;
      for (std::size_t k = 0; k + 1 < along; ++k) {
        double d2 = 0.0;
        for (std::size_t r = 0; r < c; ++r) {
          const double d = field[at(k + 1) * c + r] - field[at(k) * c + r];
          d2 += d * d;
        }
        const bool jump = std::sqrt(d2) > threshold;
        if (jump && !in_run) ++count;
        in_run = jump;
      }
    } else {
      bool armed = false, pending = false;
      for (std::size_t k = 0; k < along; ++k) {
        const double x = field[at(k)];
        if (x > 1.0 - threshold) {
          if (pending) ++count;
          pending = false;
          armed = true;
        } else if (x < threshold && armed) {
          pending = true;
          armed = false;
        }
      }
    }
    out.counts[l] = count;
    double w = 1.0;
    if (g.dim() == 2) {
      w = 0.0;
      if (l > 0) w += 0.5 * (across[l] - across[l - 1]);
      if (l + 1 < lines) w += 0.5 * (across[l + 1] - across[l]);
    }
    out.integral += w * count;
  }
  return out;
}

std::size_t SegmentationResult::fitted_count() const {
  return static_cast<std::size_t>(
      std::count_if(components.begin(), components.end(), [](const SegmentComponent& c) { return c.fitted; }));
}

namespace {

struct Fit {
  RigidMotion motion;
  double residual = 0.0;
};

double rms(const std::vector<Point>& x, const std::vector<VecN>& y, const RigidMotion& m) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += (m.apply(x[k]) - y[k]).squaredNorm();
  return std::sqrt(s / static_cast<double>(x.size()));
}

Fit fit_motion(const std::vector<Point>& x, const std::vector<VecN>& y, const WellSpec& well) {
  const int n = well.n;
  const auto N = static_cast<double>(x.size());
  VecN xbar = VecN::Zero(n), ybar = VecN::Zero(n);
  for (std::size_t k = 0; k < x.size(); ++k) {
    xbar += x[k].head(n);
    ybar += y[k];
  }
  xbar /= N;
  ybar /= N;
  auto finish = [&](const MatN& A) {
    Fit f;
    f.motion.A = A;
    f.motion.b = ybar - A * xbar;
    f.residual = rms(x, y, f.motion);
    return f;
  };
  switch (well.kind) {
    case WellKind::RotationGroup: {
      MatN M = MatN::Zero(n, n);
      for (std::size_t k = 0; k < x.size(); ++k) M += (y[k] - ybar) * (x[k].head(n) - xbar).transpose();
      return finish(nearest_rotation(M));
    }
    case WellKind::SkewLinearised: {
      MatN W = MatN::Zero(n, n);
      if (n == 2) {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
          const VecN xc = x[k].head(2) - xbar, yc = y[k] - ybar;
          num += -xc(1) * yc(0) + xc(0) * yc(1);
          den += xc.squaredNorm();
        }
        const double w = den > 0.0 ? num / den : 0.0;
        W(0, 1) = -w;
        W(1, 0) = w;
      }
      return finish(W);
    }
    case WellKind::FiniteSet: {
      Fit best;
      bool have = false;
      for (const MatN& A : well.members) {
        Fit f = finish(A);
        if (!have || f.residual < best.residual) best = f;
        have = true;
      }
      return best;
    }
  }
  throw InvalidInput("segment_rigid: unknown well");
}

}  // namespace

SegmentationResult segment_rigid(const StructuredGrid& g, const std::vector<double>& u, int components,
                                 const std::vector<double>& v, double v_threshold, const WellSpec& well) {
  check_nodal(g, u, components, "segment_rigid");
  check_nodal(g, v, 1, "segment_rigid");
  if (components != g.dim() || well.n != components)
    throw InvalidInput("segment_rigid: well dimension must match the grid");
  const std::size_t nx = static_cast<std::size_t>(g.nx());
  const std::size_t ny = g.dim() == 1 ? 1 : static_cast<std::size_t>(g.ny());
  auto cell_nodes = [&](std::size_t cell, std::size_t* out) -> int {
    if (g.dim() == 1) {
      out[0] = cell;
      out[1] = cell + 1;
      return 2;
    }
    const std::size_t i = cell % nx, j = cell / nx;
    out[0] = g.node(i, j);
    out[1] = g.node(i + 1, j);
    out[2] = g.node(i, j + 1);
    out[3] = g.node(i + 1, j + 1);
    return 4;
  };
  SegmentationResult res;
  res.labels.assign(g.cell_count(), -2);
  for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
    std::size_t nodes[4];
    const int m = cell_nodes(cell, nodes);
    bool keep = true;
    for (int k = 0; k < m; ++k) keep = keep && v[nodes[k]] > v_threshold;
    if (!keep) res.labels[cell] = -1;
  }
  std::vector<int> stamp(g.node_count(), -1);
  const auto c = static_cast<std::size_t>(components);
  for (std::size_t seed = 0; seed < g.cell_count(); ++seed) {
    if (res.labels[seed] != -2) continue;
    const int id = static_cast<int>(res.components.size());
    SegmentComponent comp;
    std::deque<std::size_t> queue{seed};
    res.labels[seed] = id;
    while (!queue.empty()) {
      const std::size_t cell = queue.front();
      queue.pop_front();
      comp.cells.push_back(cell);
      const std::size_t i = cell % nx, j = cell / nx;
      comp.area += g.hx(i) * g.hy(j);
      std::size_t nb[4];
      int count = 0;
      if (i > 0) nb[count++] = cell - 1;
      if (i + 1 < nx) nb[count++] = cell + 1;
      if (j > 0) nb[count++] = cell - nx;
      if (j + 1 < ny) nb[count++] = cell + nx;
      for (int k = 0; k < count; ++k)
        if (res.labels[nb[k]] == -2) {
          res.labels[nb[k]] = id;
          queue.push_back(nb[k]);
        }
    }
    std::sort(comp.cells.begin(), comp.cells.end());
    if (comp.cells.size() >= 3) {
      std::vector<Point> xs;
      std::vector<VecN> ys;
      for (std::size_t cell : comp.cells) {
        std::size_t nodes[4];
        const int m = cell_nodes(cell, nodes);
        for (int k = 0; k < m; ++k) {
          if (stamp[nodes[k]] == id) continue;
          stamp[nodes[k]] = id;
          xs.push_back(g.node_point(nodes[k]));
          VecN y(components);
          for (std::size_t r = 0; r < c; ++r) y(static_cast<Eigen::Index>(r)) = u[nodes[k] * c + r];
          ys.push_back(y);
        }
      }
      const Fit f = fit_motion(xs, ys, well);
      comp.fitted = true;
      comp.motion = f.motion;
      comp.residual = f.residual;
    }
    res.components.push_back(std::move(comp));
  }
  return res;
}

RigidityRatio rigidity_ratio(const StructuredGrid& g, const std::vector<double>& u, int components,
                             const WellSpec& well, double p) {
  const int n = components;
  const double p_max = n == 1 ? std::numeric_limits<double>::infinity() : static_cast<double>(n) / (n - 1);
  if (!(p > 1.0 && p < p_max)) throw InvalidInput("rigidity_ratio: p must lie in (1, n/(n-1))");
  if (well.n != n) throw InvalidInput("rigidity_ratio: well dimension must match the field");
  const PhaseFieldState s = state_of(g, u, components);
  const auto grads = deformation_gradient(s);
  const auto qps = quadrature_points(g);

  double rhs = 0.0;
  for (std::size_t q = 0; q < grads.size(); ++q)
    rhs += qps[q].weight * std::pow((grads[q] - project_to_well(grads[q], well)).norm(), p);
  rhs = std::pow(rhs, 1.0 / p);

  auto cost = [&](const MatN& A) {
    double t = 0.0;
    for (std::size_t q = 0; q < grads.size(); ++q) t += qps[q].weight * std::pow((grads[q] - A).norm(), p);
    return t;
  };
  double lhs_p = 0.0;
  switch (well.kind) {
    case WellKind::FiniteSet: {
      lhs_p = std::numeric_limits<double>::infinity();
      for (const MatN& A : well.members) lhs_p = std::min(lhs_p, cost(A));
      break;
    }
    case WellKind::RotationGroup:
    case WellKind::SkewLinearised: {
      if (n == 1) {
        lhs_p = cost(well.kind == WellKind::RotationGroup ? MatN(MatN::Identity(1, 1)) : MatN(MatN::Zero(1, 1)));
        break;
      }
      const bool rot = well.kind == WellKind::RotationGroup;
      double bound = 1.0;
      for (const MatN& F : grads) bound = std::max(bound, F.norm() + 1.0);
      const double lo = rot ? -std::numbers::pi : -bound;
      const double hi = rot ? std::numbers::pi : bound;
      auto member = [&](double t) {
        if (rot) return rotation2(t);
        MatN W = MatN::Zero(2, 2);
        W(0, 1) = -t;
        W(1, 0) = t;
        return W;
      };
      auto f = [&](double t) { return cost(member(t)); };
      const int samples = 720;
      const double step = (hi - lo) / samples;
      double best_t = lo, best = f(lo);
      for (int k = 1; k < samples; ++k) {
        const double t = lo + k * step;
        const double val = f(t);
        if (val < best) {
          best = val;
          best_t = t;
        }
      }
      const double t = golden_min(f, best_t - step, best_t + step, 1e-10 * std::max(1.0, step));
      lhs_p = std::min(best, f(t));
      break;
    }
  }
  RigidityRatio r;
  r.lhs = std::pow(lhs_p, 1.0 / p);
  r.rhs = rhs;
  if (rhs < 1e-12) {
    if (r.lhs >= 1e-6)
      throw InconsistencyError("rigidity_ratio: gradient lies in the well but is not close to a single member");
    r.ratio = 0.0;
  } else {
    r.ratio = r.lhs / rhs;
  }
  return r;
}

void to_json(nlohmann::json& j, const CoareaReport& r) {
  j = nlohmann::json{{"levels", r.levels},
                     {"perimeter", r.perimeter},
                     {"lambda", r.lambda},
                     {"bound", r.bound},
                     {"mean_perimeter", r.mean_perimeter}};
}

void to_json(nlohmann::json& j, const SegmentationResult& r) {
  j = nlohmann::json::array();
  for (const auto& c : r.components) {
    nlohmann::json e{{"cells", c.cells.size()}, {"area", c.area}, {"fitted", c.fitted}};
    if (c.fitted) {
      std::vector<std::vector<double>> a;
      for (Eigen::Index r0 = 0; r0 < c.motion.A.rows(); ++r0) {
        a.emplace_back();
        for (Eigen::Index q = 0; q < c.motion.A.cols(); ++q) a.back().push_back(c.motion.A(r0, q));
      }
      e["A"] = a;
      e["b"] = std::vector<double>(c.motion.b.data(), c.motion.b.data() + c.motion.b.size());
      e["residual"] = c.residual;
    }
    j.push_back(e);
  }
}

}  // namespace rigidfield
