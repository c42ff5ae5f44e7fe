#ifndef MPRK_PDS_HPP
#define MPRK_PDS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "mprk/error.hpp"

namespace mprk {

using Matrix = Eigen::MatrixXd;

/// Component concentrations y_1..y_N. Entries must be finite; positivity is
/// enforced where a scheme consumes the state, not here.
using StateVector = Eigen::VectorXd;

inline double total_mass(const StateVector& y) { return y.sum(); }

inline bool all_finite(const StateVector& y) { return y.allFinite(); }

inline void require_positive(const StateVector& y, const char* what) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0) || !std::isfinite(y[i])) {
      throw Error(ErrorCode::NonPositiveInput,
                  std::string(what) + " component " + std::to_string(i) + " = " +
                      std::to_string(y[i]) + " is not strictly positive");
    }
  }
}

/// A conservative production-destruction system. Only the production matrix
/// P(y) is stored; destruction is always the transpose, d_ij = p_ji.
class ProductionSystem {
 public:
  using ProductionFn = std::function<Matrix(const StateVector&)>;

  ProductionSystem(std::size_t dimension, ProductionFn production)
      : dimension_(dimension), production_(std::move(production)) {
    if (dimension_ == 0) {
      throw Error(ErrorCode::InvalidParameter, "system dimension must be at least 1");
    }
  }

  std::size_t dimension() const noexcept { return dimension_; }

  /// Evaluates P(y) and checks shape, finiteness, p_ij >= 0 and p_ii = 0.
  Matrix production(const StateVector& y) const {
    Matrix p;
    try {
      p = production_(y);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::EvaluationFailure, std::string("production evaluation failed: ") + e.what());
    }
    const auto n = static_cast<Eigen::Index>(dimension_);
    if (p.rows() != n || p.cols() != n) {
      throw Error(ErrorCode::EvaluationFailure, "production matrix has wrong shape");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (p(i, i) != 0.0) {
        throw Error(ErrorCode::SignPatternViolation, "production diagonal p_ii must be zero");
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!std::isfinite(p(i, j))) {
          throw Error(ErrorCode::EvaluationFailure, "production term is not finite");
        }
        if (p(i, j) < 0.0) {
          throw Error(ErrorCode::SignPatternViolation, "production term p_ij is negative");
        }
      }
    }
    return p;
  }

  Matrix destruction(const StateVector& y) const { return production(y).transpose(); }

  /// Right-hand side y'_i = sum_j (p_ij - d_ij).
  StateVector rhs(const StateVector& y) const {
    const Matrix p = production(y);
    return p.rowwise().sum() - p.colwise().sum().transpose();
  }

 private:
  std::size_t dimension_;
  ProductionFn production_;
};

/// Throws SignPatternViolation or NotConservative unless `a` is the rate
/// matrix of a positive and conservative linear PDS y' = A y.
inline void validate_linear_pds(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorCode::InvalidParameter, "rate matrix must be square and non-empty");
  }
  if (!a.allFinite()) {
    throw Error(ErrorCode::InvalidParameter, "rate matrix has non-finite entries");
  }
  const Eigen::Index n = a.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j ? a(i, j) > 0.0 : a(i, j) < 0.0) {
        throw Error(ErrorCode::SignPatternViolation,
                    "entry (" + std::to_string(i) + "," + std::to_string(j) + ") has the wrong sign");
      }
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const double scale = a.col(j).cwiseAbs().maxCoeff();
    const double sum = a.col(j).sum();
    if (std::abs(sum) > 1e-14 * scale) {
      throw Error(ErrorCode::NotConservative,
                  "column " + std::to_string(j) + " sums to " + std::to_string(sum));
    }
  }
}

/// Validated rate matrix A of a linear PDS (a_ii <= 0, a_ij >= 0, zero column sums).
class LinearPDSMatrix {
 public:
  explicit LinearPDSMatrix(Matrix a) : a_(std::move(a)) { validate_linear_pds(a_); }

  const Matrix& matrix() const noexcept { return a_; }
  Eigen::Index dimension() const noexcept { return a_.rows(); }

 private:
  Matrix a_;
};

struct ProductionSplit {
  Matrix production;   // A_P = A - diag(A), zero diagonal
  Matrix destruction;  // A_D = -diag(A), nonnegative diagonal
};

/// A = A_P - A_D; reassembly is exact in floating point.
inline ProductionSplit production_split(const LinearPDSMatrix& a) {
  const Matrix& m = a.matrix();
  ProductionSplit split{m, Matrix::Zero(m.rows(), m.cols())};
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    split.production(i, i) = 0.0;
    split.destruction(i, i) = -m(i, i);
  }
  return split;
}

/// The production system p_ij(y) = a_ij y_j (i != j) induced by y' = A y.
inline ProductionSystem linear_production_system(const LinearPDSMatrix& a) {
  Matrix ap = production_split(a).production;
  return ProductionSystem(static_cast<std::size_t>(ap.rows()),
                          [ap](const StateVector& y) -> Matrix { return ap * y.asDiagonal(); });
}

}  // namespace mprk

#endif  // MPRK_PDS_HPP
