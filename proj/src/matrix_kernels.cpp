#include "rigidfield/matrix_kernels.hpp"

#include "rigidfield/errors.hpp"

#include <cmath>
#include <limits>

namespace rigidfield {

namespace {

void require_finite(const MatN& a, const char* what) {
  if (!a.allFinite()) throw InvalidInput(std::string(what) + ": non-finite matrix entries");
}

void require_dim(const MatN& a, int n, const char* what) {
  if (a.rows() != n || a.cols() != n)
    throw InvalidInput(std::string(what) + ": dimension mismatch");
}

}  // namespace

WellSpec WellSpec::rotations(int n, double alpha) {
  WellSpec w;
  w.kind = WellKind::RotationGroup;
  w.n = n;
  w.alpha = alpha;
  w.validate();
  return w;
}

WellSpec WellSpec::finite_set(std::vector<MatN> members, double alpha) {
  WellSpec w;
  w.kind = WellKind::FiniteSet;
  w.n = members.empty() ? 0 : static_cast<int>(members.front().rows());
  w.members = std::move(members);
  w.alpha = alpha;
  w.validate();
  return w;
}

WellSpec WellSpec::skew(int n, double alpha) {
  WellSpec w;
  w.kind = WellKind::SkewLinearised;
  w.n = n;
  w.alpha = alpha;
  w.validate();
  return w;
}

void WellSpec::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidInput("well: alpha must be > 0");
  if (n < 1 || n > 3) throw InvalidInput("well: dimension must be 1, 2 or 3");
  if (kind == WellKind::FiniteSet) {
    if (members.empty()) throw InvalidInput("well: finite set must be nonempty");
    for (const auto& m : members) {
      require_dim(m, n, "well");
      require_finite(m, "well");
    }
  }
}

MatN rotation2(double angle) {
  MatN r(2, 2);
  const double c = std::cos(angle), s = std::sin(angle);
  r << c, -s, s, c;
  return r;
}

MatN sym_part(const MatN& a) { return 0.5 * (a + a.transpose()); }

MatN skew_part(const MatN& a) { return 0.5 * (a - a.transpose()); }

MatN nearest_rotation(const MatN& a) {
  require_finite(a, "nearest_rotation");
  if (a.rows() != a.cols() || a.rows() < 1 || a.rows() > 3)
    throw InvalidInput("nearest_rotation: expected a square matrix with n <= 3");
  const auto n = a.rows();
  if (n == 1) return MatN::Identity(1, 1);
  Eigen::JacobiSVD<MatN> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  MatN u = svd.matrixU();
  const MatN& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(n - 1) *= -1.0;
  return u * v.transpose();
}

MatN project_to_well(const MatN& a, const WellSpec& well) {
  require_finite(a, "project_to_well");
  require_dim(a, well.n, "project_to_well");
  switch (well.kind) {
    case WellKind::RotationGroup:
      return nearest_rotation(a);
    case WellKind::FiniteSet: {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < well.members.size(); ++i) {
        const double d = (a - well.members[i]).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      return well.members[best];
    }
    case WellKind::SkewLinearised:
      return skew_part(a);
  }
  return a;
}

double dist2_to_well(const MatN& a, const WellSpec& well) {
  require_finite(a, "dist2_to_well");
  require_dim(a, well.n, "dist2_to_well");
  switch (well.kind) {
    case WellKind::RotationGroup: {
      const auto n = a.rows();
      if (n == 1) return (a(0, 0) - 1.0) * (a(0, 0) - 1.0);
      if (n == 2) return detail::dist2_so2(a(0, 0), a(0, 1), a(1, 0), a(1, 1));
      Eigen::JacobiSVD<MatN> svd(a);
      VecN s = svd.singularValues();
      if (a.determinant() < 0.0) s(n - 1) = -s(n - 1);
      return (s.array() - 1.0).square().sum();
    }
    case WellKind::FiniteSet: {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& m : well.members) best = std::min(best, (a - m).squaredNorm());
      return best;
    }
    case WellKind::SkewLinearised:
      return sym_part(a).squaredNorm();
  }
  return 0.0;
}

bool rank_one_connected(const MatN& a, const MatN& b) {
  require_finite(a, "rank_one_connected");
  require_finite(b, "rank_one_connected");
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidInput("rank_one_connected: dimension mismatch");
  const MatN d = a - b;
  Eigen::JacobiSVD<MatN> svd(d);
  const VecN s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  if (smax == 0.0) return false;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-10 * smax) ++rank;
  return rank == 1;
}

double coercivity_margin(const MatN& a, const VecN& xi) {
  require_finite(a, "coercivity_margin");
  if (xi.size() != a.rows()) throw InvalidInput("coercivity_margin: dimension mismatch");
  if (std::abs(xi.norm() - 1.0) > 1e-12) throw InvalidInput("coercivity_margin: xi must be a unit vector");
  const auto n = static_cast<double>(a.rows());
  const double bracket = std::max(0.0, 0.5 * (a * xi).squaredNorm() - n);
  return dist2_to_well(a, WellSpec::rotations(static_cast<int>(a.rows()))) - bracket;
}

}  // namespace rigidfield
