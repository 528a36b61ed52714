#pragma once

// Small dense matrix geometry for n in {1, 2, 3}: distances to energy wells,
// rotation projection, symmetric/skew split and rank-one connections.

#include <Eigen/Dense>

#include <vector>

namespace rigidfield {

using MatN = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using VecN = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;

enum class WellKind { RotationGroup, FiniteSet, SkewLinearised };

/// Zero set of the bulk density together with its coercivity constant.
struct WellSpec {
  WellKind kind = WellKind::RotationGroup;
  int n = 2;
  std::vector<MatN> members;  // FiniteSet only
  double alpha = 1.0;

  static WellSpec rotations(int n, double alpha = 1.0);
  static WellSpec finite_set(std::vector<MatN> members, double alpha = 1.0);
  static WellSpec skew(int n, double alpha = 1.0);

  /// Throws InvalidInput when an invariant is broken.
  void validate() const;
};

MatN rotation2(double angle);
MatN sym_part(const MatN& a);
MatN skew_part(const MatN& a);

/// Frobenius-nearest element of SO(n). Uses the sign-corrected SVD, so when
/// the minimizer is not unique (det A < 0 with a repeated smallest singular
/// value) the representative U diag(1,..,1,-1) V^T is returned.
MatN nearest_rotation(const MatN& a);

/// Nearest point of the well (rotation, finite member with lowest index on
/// ties, or the skew part for the linearised well).
MatN project_to_well(const MatN& a, const WellSpec& well);

double dist2_to_well(const MatN& a, const WellSpec& well);

/// rank(A - B) == 1 with relative tolerance 1e-10 * sigma_max.
bool rank_one_connected(const MatN& a, const MatN& b);

/// dist^2(A, SO(n)) - [|A xi|^2 / 2 - n]_+ ; nonnegative for every input.
double coercivity_margin(const MatN& a, const VecN& xi);

namespace detail {

// Closed forms for 2x2 matrices, used in the assembly and solver hot loops.
// max_R tr(R^T F) over SO(2) is |(F00 + F11, F10 - F01)|.
inline double dist2_so2(double f00, double f01, double f10, double f11) {
  const double p = f00 + f11;
  const double q = f10 - f01;
  const double d = f00 * f00 + f01 * f01 + f10 * f10 + f11 * f11 + 2.0 -
                   2.0 * std::sqrt(p * p + q * q);
  return d > 0.0 ? d : 0.0;
}

}  // namespace detail

}  // namespace rigidfield
