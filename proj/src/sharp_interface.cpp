#include "rigidfield/sharp_interface.hpp"

#include "rigidfield/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rigidfield {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

bool on_segment(const Point& p, const Point& a, const Point& b, double tol) {
  const Point ab = b - a;
  const double len = ab.norm();
  if (len == 0.0) return (p - a).norm() <= tol;
  if (std::abs(cross(ab, p - a)) / len > tol) return false;
  const double s = ab.dot(p - a) / (len * len);
  return s >= -tol / len && s <= 1.0 + tol / len;
}

}  // namespace

double Polygon::signed_area() const {
  double s = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    s += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
  return 0.5 * s;
}

bool Polygon::on_boundary(const Point& p, double tol) const {
  for (std::size_t i = 0; i < vertices.size(); ++i)
    if (on_segment(p, vertices[i], vertices[(i + 1) % vertices.size()], tol)) return true;
  return false;
}

bool Polygon::contains(const Point& p, double tol) const {
  if (on_boundary(p, tol)) return true;
  int winding = 0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Point& a = vertices[i];
    const Point& b = vertices[(i + 1) % vertices.size()];
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && cross(b - a, p - a) > 0.0) ++winding;
    } else if (b.y() <= p.y() && cross(b - a, p - a) < 0.0) {
      --winding;
    }
  }
  return winding != 0;
}

PolyhedralPartition PolyhedralPartition::polygons(const Box& domain, std::vector<Polygon> pieces) {
  PolyhedralPartition p;
  p.dim_ = 2;
  p.domain_ = domain;
  for (auto& poly : pieces)
    if (poly.signed_area() < 0.0) std::reverse(poly.vertices.begin(), poly.vertices.end());
  p.pieces_ = std::move(pieces);
  p.validate();
  return p;
}

PolyhedralPartition PolyhedralPartition::interval(double a, double b, std::vector<double> cuts) {
  PolyhedralPartition p;
  p.dim_ = 1;
  p.domain_ = Box{Point(a, 0.0), Point(b, 0.0)};
  std::sort(cuts.begin(), cuts.end());
  p.cuts_ = std::move(cuts);
  p.validate();
  return p;
}

std::size_t PolyhedralPartition::piece_count() const {
  return dim_ == 1 ? cuts_.size() + 1 : pieces_.size();
}

double PolyhedralPartition::domain_measure() const {
  return dim_ == 1 ? domain_.width() : domain_.width() * domain_.height();
}

double PolyhedralPartition::piece_measure(std::size_t i) const {
  if (dim_ == 2) return pieces_.at(i).area();
  const double lo = i == 0 ? domain_.lo.x() : cuts_.at(i - 1);
  const double hi = i == cuts_.size() ? domain_.hi.x() : cuts_.at(i);
  return hi - lo;
}

bool PolyhedralPartition::inside_domain(const Point& x, double tol) const {
  if (x.x() < domain_.lo.x() - tol || x.x() > domain_.hi.x() + tol) return false;
  if (dim_ == 1) return true;
  return x.y() >= domain_.lo.y() - tol && x.y() <= domain_.hi.y() + tol;
}

void PolyhedralPartition::validate() const {
  if (dim_ == 1) {
    if (!(domain_.width() > 0.0)) throw InvalidInput("partition: empty interval");
    double prev = domain_.lo.x();
    for (double c : cuts_) {
      if (!(c > prev)) throw InvalidInput("partition: cuts must be strictly inside and increasing");
      prev = c;
    }
    if (!(domain_.hi.x() > prev)) throw InvalidInput("partition: cut outside the interval");
    return;
  }
  if (!(domain_.width() > 0.0) || !(domain_.height() > 0.0)) throw InvalidInput("partition: empty domain");
  if (pieces_.empty()) throw InvalidInput("partition: no pieces");
  const double scale = std::max(domain_.width(), domain_.height());
  const double tol = 1e-12 * scale;
  double total = 0.0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& poly = pieces_[i];
    if (poly.vertices.size() < 3 || !(poly.area() > 0.0))
      throw InvalidInput("partition: piece " + std::to_string(i) + " has no positive area");
    for (const auto& v : poly.vertices)
      if (!inside_domain(v, tol)) throw InvalidInput("partition: piece " + std::to_string(i) + " leaves the domain");
    total += poly.area();
  }
  if (std::abs(total - domain_measure()) > 1e-10 * domain_measure())
    throw InvalidInput("partition: pieces do not tile the domain (area mismatch)");
  for (std::size_t i = 0; i < pieces_.size(); ++i)
    for (std::size_t j = 0; j < pieces_.size(); ++j) {
      if (i == j) continue;
      for (const auto& v : pieces_[j].vertices)
        if (pieces_[i].contains(v, tol) && !pieces_[i].on_boundary(v, tol))
          throw InvalidInput("partition: pieces " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
    }
}

int PolyhedralPartition::locate(const Point& x) const {
  if (dim_ == 1) {
    if (!inside_domain(x)) return -1;
    for (std::size_t i = 0; i < cuts_.size(); ++i)
      if (x.x() <= cuts_[i]) return static_cast<int>(i);
    return static_cast<int>(cuts_.size());
  }
  const double tol = 1e-12 * std::max(domain_.width(), domain_.height());
  for (std::size_t i = 0; i < pieces_.size(); ++i)
    if (pieces_[i].contains(x, tol)) return static_cast<int>(i);
  return -1;
}

VecN RigidMotion::apply(const Point& x) const {
  const auto n = A.rows();
  VecN xv(n);
  for (Eigen::Index k = 0; k < n; ++k) xv(k) = x(k);
  return A * xv + b;
}

bool same_motion(const RigidMotion& a, const RigidMotion& b) {
  return (a.A - b.A).norm() + (a.b - b.b).norm() <= 1e-12 * (1.0 + a.A.norm() + a.b.norm());
}

Point JumpFacet::tangent() const {
  const Point d = b - a;
  const double len = d.norm();
  return len > 0.0 ? Point(d / len) : Point(-normal.y(), normal.x());
}

std::vector<JumpFacet> facet_list(const PolyhedralPartition& p) {
  std::vector<JumpFacet> out;
  if (p.dim() == 1) {
    for (std::size_t i = 0; i < p.cuts().size(); ++i) {
      JumpFacet f;
      f.a = f.b = Point(p.cuts()[i], 0.0);
      f.normal = Point(1.0, 0.0);
      f.left = static_cast<int>(i);
      f.right = static_cast<int>(i) + 1;
      f.measure = 1.0;
      out.push_back(f);
    }
    return out;
  }
  const auto& pieces = p.pieces();
  const double tol = 1e-12 * std::max(p.domain().width(), p.domain().height());
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& vi = pieces[i].vertices;
    for (std::size_t j = i + 1; j < pieces.size(); ++j) {
      const auto& vj = pieces[j].vertices;
      for (std::size_t e = 0; e < vi.size(); ++e) {
        const Point a = vi[e], b = vi[(e + 1) % vi.size()];
        for (std::size_t f = 0; f < vj.size(); ++f) {
          const Point c = vj[f], d = vj[(f + 1) % vj.size()];
          const bool same = ((a - d).norm() <= tol && (b - c).norm() <= tol) ||
                            ((a - c).norm() <= tol && (b - d).norm() <= tol);
          if (same) {
            JumpFacet jf;
            jf.a = a;
            jf.b = b;
            const Point t = (b - a).normalized();
            jf.normal = Point(t.y(), -t.x());  // outward for the CCW piece i
            jf.left = static_cast<int>(i);
            jf.right = static_cast<int>(j);
            jf.measure = (b - a).norm();
            out.push_back(jf);
            continue;
          }
          // Collinear edges that overlap on a segment without sharing both
          // endpoints make the partition non-conforming.
          const Point ab = b - a;
          const double len = ab.norm();
          if (std::abs(cross(ab, c - a)) / len > tol || std::abs(cross(ab, d - a)) / len > tol) continue;
          const double s0 = ab.dot(c - a) / (len * len), s1 = ab.dot(d - a) / (len * len);
          const double overlap = (std::min(1.0, std::max(s0, s1)) - std::max(0.0, std::min(s0, s1))) * len;
          if (overlap > tol) {
            std::ostringstream os;
            os << "facet_list: non-conforming boundaries between pieces " << i << " and " << j;
            throw InvalidInput(os.str());
          }
        }
      }
    }
  }
  return out;
}

std::vector<JumpFacet> jump_facets(const PiecewiseRigidMap& u) {
  std::vector<JumpFacet> out;
  for (const auto& f : facet_list(u.partition))
    if (!same_motion(u.motions.at(f.left), u.motions.at(f.right))) out.push_back(f);
  return out;
}

double jump_measure(const PiecewiseRigidMap& u) {
  double s = 0.0;
  for (const auto& f : jump_facets(u)) s += f.measure;
  return s;
}

double limit_energy(const PiecewiseRigidMap& u, const EnergyModel& m) {
  const double cv = surface_constant(m.potential);
  if (!m.finsler) return 2.0 * cv * jump_measure(u);
  const auto& phi = *m.finsler;
  double s = 0.0;
  for (const auto& f : jump_facets(u)) {
    if (u.partition.dim() == 1) {
      s += phi(f.a, f.normal);
      continue;
    }
    constexpr int kSub = 64;
    const double piece = f.measure / kSub;
    for (int k = 0; k < kSub; ++k) {
      const Point mid = f.a + (f.b - f.a) * ((k + 0.5) / kSub);
      s += phi(mid, f.normal) * piece;
    }
  }
  return 2.0 * cv * s;
}

VecN eval_map(const PiecewiseRigidMap& u, const Point& x) {
  const int piece = u.partition.locate(x);
  if (piece < 0) throw InvalidInput("eval_map: point outside the domain");
  return u.motions.at(static_cast<std::size_t>(piece)).apply(x);
}

MapReport validate_map(const PiecewiseRigidMap& u) {
  MapReport r;
  auto fail = [&](std::string msg) {
    r.passed = false;
    r.issues.push_back(std::move(msg));
  };
  try {
    u.partition.validate();
  } catch (const InvalidInput& e) {
    fail(e.what());
  }
  try {
    u.well.validate();
  } catch (const InvalidInput& e) {
    fail(e.what());
  }
  if (u.motions.size() != u.partition.piece_count()) {
    fail("motion count does not match piece count");
    return r;
  }
  for (std::size_t i = 0; i < u.motions.size(); ++i) {
    const auto& m = u.motions[i];
    if (m.A.rows() != u.well.n || m.A.cols() != u.well.n || m.b.size() != u.well.n) {
      fail("piece " + std::to_string(i) + ": motion dimension mismatch");
      r.well_distance.push_back(std::nan(""));
      continue;
    }
    const double d = std::sqrt(dist2_to_well(m.A, u.well));
    r.well_distance.push_back(d);
    if (!(d < 1e-10)) {
      std::ostringstream os;
      os << "piece " << i << ": matrix is at distance " << d << " from the well";
      fail(os.str());
    }
  }
  return r;
}

}  // namespace rigidfield
