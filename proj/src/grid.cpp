#include "rigidfield/grid.hpp"

#include "rigidfield/errors.hpp"
#include "rigidfield/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rigidfield {

namespace {

constexpr double kGaussLo = 0.21132486540518711775;  // (1 - 1/sqrt 3) / 2
constexpr double kGaussHi = 0.78867513459481288225;
constexpr double kGauss[2] = {kGaussLo, kGaussHi};

std::vector<double> linspace(double a, double b, int cells) {
  std::vector<double> out(static_cast<std::size_t>(cells) + 1);
  for (int i = 0; i <= cells; ++i) out[static_cast<std::size_t>(i)] = a + (b - a) * i / cells;
  out.back() = b;
  return out;
}

void check_axis(const std::vector<double>& c, const char* name) {
  if (c.size() < 3) throw InvalidInput(std::string("grid: need at least 2 cells along ") + name);
  for (std::size_t i = 0; i + 1 < c.size(); ++i)
    if (!(c[i + 1] > c[i]) || !std::isfinite(c[i + 1]))
      throw InvalidInput(std::string("grid: coordinates along ") + name + " must increase");
}

// Per-row partial sums reduced in row order keep totals independent of the
// worker count.
template <class RowFn>
EnergyBreakdown reduce_rows(std::size_t rows, RowFn&& row) {
  std::vector<EnergyBreakdown> partial(rows);
  parallel_for(rows, [&](std::size_t j) { partial[j] = row(j); });
  EnergyBreakdown e;
  for (const auto& p : partial) {
    e.bulk += p.bulk;
    e.potential += p.potential;
    e.surface_gradient += p.surface_gradient;
  }
  e.total = e.bulk + e.potential + e.surface_gradient;
  return e;
}

}  // namespace

StructuredGrid StructuredGrid::uniform_1d(double x0, double length, int nx) {
  if (nx < 2 || !(length > 0.0)) throw InvalidInput("grid: need nx >= 2 and positive length");
  return rectilinear(linspace(x0, x0 + length, nx));
}

StructuredGrid StructuredGrid::uniform_2d(const Point& origin, double lx, double ly, int nx, int ny) {
  if (nx < 2 || ny < 2 || !(lx > 0.0) || !(ly > 0.0))
    throw InvalidInput("grid: need nx, ny >= 2 and positive extents");
  return rectilinear(linspace(origin.x(), origin.x() + lx, nx), linspace(origin.y(), origin.y() + ly, ny));
}

StructuredGrid StructuredGrid::rectilinear(std::vector<double> xs, std::vector<double> ys) {
  check_axis(xs, "x");
  if (!ys.empty()) check_axis(ys, "y");
  StructuredGrid g;
  g.xs_ = std::move(xs);
  g.ys_ = std::move(ys);
  return g;
}

Point StructuredGrid::node_point(std::size_t idx) const {
  const std::size_t i = idx % nodes_x();
  const std::size_t j = idx / nodes_x();
  return Point(xs_[i], dim() == 1 ? 0.0 : ys_[j]);
}

double StructuredGrid::max_h() const {
  double h = 0.0;
  for (std::size_t i = 0; i + 1 < xs_.size(); ++i) h = std::max(h, xs_[i + 1] - xs_[i]);
  for (std::size_t j = 0; j + 1 < ys_.size(); ++j) h = std::max(h, ys_[j + 1] - ys_[j]);
  return h;
}

bool StructuredGrid::uniform() const {
  auto even = [](const std::vector<double>& c) {
    if (c.size() < 2) return true;
    const double h = (c.back() - c.front()) / static_cast<double>(c.size() - 1);
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
      if (std::abs(c[i + 1] - c[i] - h) > 1e-9 * h) return false;
    return true;
  };
  return even(xs_) && even(ys_);
}

Box StructuredGrid::bounds() const {
  if (dim() == 1) return Box{Point(xs_.front(), 0.0), Point(xs_.back(), 0.0)};
  return Box{Point(xs_.front(), ys_.front()), Point(xs_.back(), ys_.back())};
}

bool StructuredGrid::on_boundary(std::size_t idx) const {
  const std::size_t i = idx % nodes_x();
  const std::size_t j = idx / nodes_x();
  if (i == 0 || i + 1 == nodes_x()) return true;
  return dim() == 2 && (j == 0 || j + 1 == nodes_y());
}

StructuredGrid StructuredGrid::translated(const Point& shift) const {
  StructuredGrid g = *this;
  for (auto& x : g.xs_) x += shift.x();
  for (auto& y : g.ys_) y += shift.y();
  return g;
}

PhaseFieldState PhaseFieldState::make(const StructuredGrid& grid, int components) {
  PhaseFieldState s;
  s.grid = grid;
  s.components = components;
  s.u.assign(grid.node_count() * static_cast<std::size_t>(components), 0.0);
  s.v.assign(grid.node_count(), 1.0);
  return s;
}

void PhaseFieldState::validate() const {
  if (components != grid.dim()) throw InvalidInput("state: component count must equal the grid dimension");
  if (u.size() != grid.node_count() * static_cast<std::size_t>(components) || v.size() != grid.node_count())
    throw InvalidInput("state: field sizes do not match the grid");
  for (double x : v)
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput("state: v must lie in [0,1]");
}

VecN PhaseFieldState::u_at(std::size_t node) const {
  VecN r(components);
  for (int c = 0; c < components; ++c) r(c) = u[node * static_cast<std::size_t>(components) + static_cast<std::size_t>(c)];
  return r;
}

std::vector<double> sample_pr_map(const StructuredGrid& g, const PiecewiseRigidMap& u) {
  const Box gb = g.bounds();
  const Box& db = u.partition.domain();
  const double tol = 1e-12 * (1.0 + std::max(db.width(), db.height()));
  if (g.dim() != u.partition.dim() || (gb.lo - db.lo).norm() > tol || (gb.hi - db.hi).norm() > tol)
    throw InvalidInput("sample_pr_map: grid does not match the map's domain");
  const int n = u.n();
  std::vector<double> out(g.node_count() * static_cast<std::size_t>(n));
  parallel_for(g.nodes_y(), [&](std::size_t j) {
    for (std::size_t i = 0; i < g.nodes_x(); ++i) {
      const std::size_t idx = g.node(i, j);
      const VecN val = eval_map(u, g.node_point(idx));
      for (int c = 0; c < n; ++c) out[idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(c)] = val(c);
    }
  });
  return out;
}

std::vector<QuadraturePoint> quadrature_points(const StructuredGrid& g) {
  std::vector<QuadraturePoint> q;
  if (g.dim() == 1) {
    for (std::size_t i = 0; i < static_cast<std::size_t>(g.nx()); ++i)
      for (double gx : kGauss) q.push_back({i, Point(g.xs()[i] + gx * g.hx(i), 0.0), 0.5 * g.hx(i)});
    return q;
  }
  for (std::size_t j = 0; j < static_cast<std::size_t>(g.ny()); ++j)
    for (std::size_t i = 0; i < static_cast<std::size_t>(g.nx()); ++i)
      for (double gy : kGauss)
        for (double gx : kGauss)
          q.push_back({j * static_cast<std::size_t>(g.nx()) + i,
                       Point(g.xs()[i] + gx * g.hx(i), g.ys()[j] + gy * g.hy(j)), 0.25 * g.hx(i) * g.hy(j)});
  return q;
}

std::vector<MatN> deformation_gradient(const PhaseFieldState& s, bool symmetric) {
  const auto& g = s.grid;
  const auto c = static_cast<std::size_t>(s.components);
  std::vector<MatN> out;
  out.reserve(g.cell_count() * (g.dim() == 1 ? 2 : 4));
  if (g.dim() == 1) {
    for (std::size_t i = 0; i < static_cast<std::size_t>(g.nx()); ++i) {
      MatN f(1, 1);
      f(0, 0) = (s.u[(i + 1) * c] - s.u[i * c]) / g.hx(i);
      out.push_back(f);
      out.push_back(f);
    }
    return out;
  }
  for (std::size_t j = 0; j < static_cast<std::size_t>(g.ny()); ++j)
    for (std::size_t i = 0; i < static_cast<std::size_t>(g.nx()); ++i) {
      const std::size_t n00 = g.node(i, j), n10 = g.node(i + 1, j), n01 = g.node(i, j + 1), n11 = g.node(i + 1, j + 1);
      for (double eta : kGauss)
        for (double xi : kGauss) {
          MatN f(2, 2);
          for (std::size_t k = 0; k < 2; ++k) {
            const double u00 = s.u[n00 * c + k], u10 = s.u[n10 * c + k], u01 = s.u[n01 * c + k], u11 = s.u[n11 * c + k];
            f(static_cast<Eigen::Index>(k), 0) = ((u10 - u00) * (1.0 - eta) + (u11 - u01) * eta) / g.hx(i);
            f(static_cast<Eigen::Index>(k), 1) = ((u01 - u00) * (1.0 - xi) + (u11 - u10) * xi) / g.hy(j);
          }
          out.push_back(symmetric ? sym_part(f) : f);
        }
    }
  return out;
}

EnergyBreakdown assemble_energy(const PhaseFieldState& s, const EnergyModel& m, const Schedule& sch,
                                const CellMask& mask) {
  const auto& g = s.grid;
  const double k = sch.k_eps();
  const double eps = sch.eps;
  const auto c = static_cast<std::size_t>(s.components);
  const bool fast_v = m.quadratic_in_v;
  const auto phi_of = [&](double v) { return fast_v ? v * v : m.degradation(v); };
  const auto pot_of = [&](double v) { return fast_v ? (1.0 - v) * (1.0 - v) : m.potential(v); };
  const auto bulk_of = [&](const Point& x, const double* f, int n) {
    if (m.default_bulk) return well_density(m.well, f, n);
    MatN a(n, n);
    for (int r = 0; r < n; ++r)
      for (int q = 0; q < n; ++q) a(r, q) = f[r * n + q];
    return m.bulk(x, a);
  };
  const auto grad_term = [&](const Point& x, double gx, double gy) {
    if (m.finsler) {
      const double p = (*m.finsler)(x, Point(gx, gy));
      return p * p;
    }
    return gx * gx + gy * gy;
  };

  if (g.dim() == 1) {
    return reduce_rows(1, [&](std::size_t) {
      EnergyBreakdown e;
      for (std::size_t i = 0; i < static_cast<std::size_t>(g.nx()); ++i) {
        if (mask && !mask(i, 0)) continue;
        const double h = g.hx(i);
        const double f = (s.u[(i + 1) * c] - s.u[i * c]) / h;
        const double dv = (s.v[i + 1] - s.v[i]) / h;
        for (double gx : kGauss) {
          const double w = 0.5 * h;
          const double vq = (1.0 - gx) * s.v[i] + gx * s.v[i + 1];
          const Point x(g.xs()[i] + gx * h, 0.0);
          const double ph = phi_of(vq);
          if (ph != 0.0) e.bulk += w * k * ph * bulk_of(x, &f, 1);
          e.potential += w * pot_of(vq) / eps;
          e.surface_gradient += w * eps * grad_term(x, dv, 0.0);
        }
      }
      return e;
    });
  }

  return reduce_rows(static_cast<std::size_t>(g.ny()), [&](std::size_t j) {
    EnergyBreakdown e;
    const double hy = g.hy(j);
    for (std::size_t i = 0; i < static_cast<std::size_t>(g.nx()); ++i) {
      if (mask && !mask(i, j)) continue;
      const double hx = g.hx(i);
      const std::size_t n00 = g.node(i, j), n10 = g.node(i + 1, j), n01 = g.node(i, j + 1), n11 = g.node(i + 1, j + 1);
      const double v00 = s.v[n00], v10 = s.v[n10], v01 = s.v[n01], v11 = s.v[n11];
      const double w = 0.25 * hx * hy;
      for (double eta : kGauss)
        for (double xi : kGauss) {
          const Point x(g.xs()[i] + xi * hx, g.ys()[j] + eta * hy);
          const double vq = (1.0 - xi) * (1.0 - eta) * v00 + xi * (1.0 - eta) * v10 + (1.0 - xi) * eta * v01 + xi * eta * v11;
          const double dvx = ((v10 - v00) * (1.0 - eta) + (v11 - v01) * eta) / hx;
          const double dvy = ((v01 - v00) * (1.0 - xi) + (v11 - v10) * xi) / hy;
          const double ph = phi_of(vq);
          if (ph != 0.0) {
            double f[4];
            for (std::size_t r = 0; r < 2; ++r) {
              const double u00 = s.u[n00 * c + r], u10 = s.u[n10 * c + r], u01 = s.u[n01 * c + r], u11 = s.u[n11 * c + r];
              f[2 * r] = ((u10 - u00) * (1.0 - eta) + (u11 - u01) * eta) / hx;
              f[2 * r + 1] = ((u01 - u00) * (1.0 - xi) + (u11 - u10) * xi) / hy;
            }
            e.bulk += w * k * ph * bulk_of(x, f, 2);
          }
          e.potential += w * pot_of(vq) / eps;
          e.surface_gradient += w * eps * grad_term(x, dvx, dvy);
        }
    }
    return e;
  });
}

void dump_field(const std::filesystem::path& path, const StructuredGrid& g, int components,
                const std::vector<double>& data) {
  if (data.size() != g.node_count() * static_cast<std::size_t>(components))
    throw InvalidInput("dump_field: field size does not match the grid");
  nlohmann::json h;
  h["n"] = g.dim();
  h["nx"] = g.nx();
  h["ny"] = g.ny();
  h["hx"] = (g.xs().back() - g.xs().front()) / g.nx();
  h["hy"] = g.dim() == 1 ? 0.0 : (g.ys().back() - g.ys().front()) / g.ny();
  h["components"] = components;
  h["count"] = data.size();
  h["xs"] = g.xs();
  if (g.dim() == 2) h["ys"] = g.ys();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("dump_field: cannot open " + path.string());
  out << h.dump() << '\n';
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
  } else {
    for (double d : data) {
      auto bits = std::bit_cast<std::uint64_t>(d);
      bits = __builtin_bswap64(bits);
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!out) throw InvalidInput("dump_field: write failed for " + path.string());
}

FieldFile load_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("load_field: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw CorruptFile("load_field: missing header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFile(std::string("load_field: bad header: ") + e.what());
  }
  FieldFile f;
  try {
    const int n = h.at("n").get<int>();
    const int nx = h.at("nx").get<int>();
    const int ny = h.at("ny").get<int>();
    f.components = h.at("components").get<int>();
    const auto count = h.at("count").get<std::size_t>();
    std::vector<double> xs, ys;
    if (h.contains("xs")) {
      xs = h["xs"].get<std::vector<double>>();
      if (n == 2) ys = h.at("ys").get<std::vector<double>>();
    } else {
      xs = linspace(0.0, nx * h.at("hx").get<double>(), nx);
      if (n == 2) ys = linspace(0.0, ny * h.at("hy").get<double>(), ny);
    }
    f.grid = StructuredGrid::rectilinear(std::move(xs), std::move(ys));
    if (f.grid.nx() != nx || f.grid.ny() != ny || f.grid.dim() != n ||
        count != f.grid.node_count() * static_cast<std::size_t>(f.components))
      throw CorruptFile("load_field: header is inconsistent");
    f.data.resize(count);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFile(std::string("load_field: bad header: ") + e.what());
  } catch (const InvalidInput& e) {
    throw CorruptFile(std::string("load_field: bad grid: ") + e.what());
  }
  in.read(reinterpret_cast<char*>(f.data.data()), static_cast<std::streamsize>(f.data.size() * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != f.data.size() * sizeof(double))
    throw CorruptFile("load_field: payload shorter than the header's count");
  if (in.peek() != std::char_traits<char>::eof()) throw CorruptFile("load_field: trailing bytes after payload");
  if constexpr (std::endian::native != std::endian::little) {
    for (double& d : f.data) d = std::bit_cast<double>(__builtin_bswap64(std::bit_cast<std::uint64_t>(d)));
  }
  return f;
}

}  // namespace rigidfield
