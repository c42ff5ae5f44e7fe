#ifndef MPRK_LINALG_HPP
#define MPRK_LINALG_HPP

#include <cmath>

#include <Eigen/Dense>

#include "mprk/error.hpp"

namespace mprk {

/// A nonsingular M-matrix described by its off-diagonal entries (all <= 0;
/// the diagonal of `off_diagonal` is ignored) and its column excesses
/// c_j = m_jj - sum_{i != j} |m_ij| > 0. Every Patankar system has this form,
/// and for the conservative ones c_j = 1 exactly.
struct ColumnDominantMMatrix {
  Eigen::MatrixXd off_diagonal;
  Eigen::VectorXd excess;

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd m = off_diagonal;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double s = excess[j];
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i != j) s -= m(i, j);
      }
      m(j, j) = s;
    }
    return m;
  }
};

/// Solves M x = b by Gaussian elimination in the Grassmann-Taksar-Heyman
/// style: pivots are rebuilt from the propagated column excesses instead of
/// by subtraction, so every intermediate is a sum of same-signed terms. For
/// b > 0 the result is positive and accurate componentwise to a few ulps.
inline Eigen::VectorXd solve_mmatrix(const ColumnDominantMMatrix& system, const Eigen::VectorXd& rhs) {
  const Eigen::Index n = rhs.size();
  Eigen::MatrixXd lu = system.off_diagonal;
  Eigen::VectorXd c = system.excess;
  if (lu.rows() != n || lu.cols() != n || c.size() != n) {
    throw Error(ErrorCode::InvalidParameter, "M-matrix system has inconsistent dimensions");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(c[j] > 0.0) || !std::isfinite(c[j])) {
      throw Error(ErrorCode::SingularSystem, "column excess is not positive and finite");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != j && (lu(i, j) > 0.0 || !std::isfinite(lu(i, j)))) {
        throw Error(ErrorCode::SingularSystem, "off-diagonal entry is positive or not finite");
      }
    }
  }

  for (Eigen::Index k = 0; k < n; ++k) {
    double pivot = c[k];
    for (Eigen::Index i = k + 1; i < n; ++i) pivot -= lu(i, k);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      throw Error(ErrorCode::SingularSystem, "non-positive or non-finite pivot");
    }
    lu(k, k) = pivot;
    for (Eigen::Index i = k + 1; i < n; ++i) lu(i, k) /= pivot;
    for (Eigen::Index j = k + 1; j < n; ++j) {
      const double ukj = lu(k, j);
      c[j] -= ukj * (c[k] / pivot);
      for (Eigen::Index i = k + 1; i < n; ++i) {
        if (i != j) lu(i, j) -= lu(i, k) * ukj;
      }
    }
  }

  Eigen::VectorXd x = rhs;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) x[i] -= lu(i, j) * x[j];
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    for (Eigen::Index j = i + 1; j < n; ++j) x[i] -= lu(i, j) * x[j];
    x[i] /= lu(i, i);
  }
  if (!x.allFinite()) throw Error(ErrorCode::SingularSystem, "solve produced non-finite values");
  return x;
}

}  // namespace mprk

#endif  // MPRK_LINALG_HPP
