#ifndef MPRK_STABILITY_HPP
#define MPRK_STABILITY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <Eigen/Dense>

#include "mprk/error.hpp"
#include "mprk/linear2d.hpp"
#include "mprk/mprk22.hpp"

namespace mprk {

/// (z_a, z_b) = (-dt a, -dt b).
struct ScaledStepPoint {
  double z_a;
  double z_b;

  static ScaledStepPoint from(const Linear2x2PDS& p, double dt) { return {-dt * p.a(), -dt * p.b()}; }
};

/// Stability function of MPRK22(alpha); depends on z_a + z_b only.
inline double stability_r1(ScaledStepPoint pt, double alpha) {
  const double z = pt.z_a + pt.z_b;
  return (2.0 - 2.0 * alpha * z - z * z) / (2.0 * (1.0 - z) * (1.0 - alpha * z));
}

/// Stability function of MPRK22ncs(alpha); symmetric in (z_a, z_b).
inline double stability_r0(ScaledStepPoint pt, double alpha) {
  const double z = pt.z_a + pt.z_b;
  const double mu = pt.z_a / (1.0 - alpha * pt.z_a) + pt.z_b / (1.0 - alpha * pt.z_b);
  return (2.0 - z * mu) / (2.0 * (1.0 - z));
}

inline double stability_function(ScaledStepPoint pt, const SchemeParams& params) {
  return params.conservative_stages() ? stability_r1(pt, params.alpha()) : stability_r0(pt, params.alpha());
}

namespace detail {

inline void require_sub_unit_alpha(double alpha) {
  if (!(alpha >= 0.5 && alpha < 1.0)) {
    throw Error(ErrorCode::DomainError,
                "the stability boundary exists only for 1/2 <= alpha < 1, got alpha = " + std::to_string(alpha));
  }
}

}  // namespace detail

/// Lower boundary z_b = f(xi) of the MPRK22ncs(alpha) stability region, i.e.
/// the unique z_b < 0 with R0(xi, z_b) = -1. Defined for 1/2 <= alpha < 1.
/// For alpha > 1/2 and xi >= -(2 alpha - 1) / (2 alpha (1 - alpha)) no such z_b
/// exists (R0 stays above -1 on the whole column) and -infinity is returned.
inline double boundary_f(double xi, double alpha) {
  detail::require_sub_unit_alpha(alpha);
  if (!(xi < 0.0) || !std::isfinite(xi)) throw Error(ErrorCode::DomainError, "xi must be negative");
  const double s = 1.0 - alpha * xi;
  const double denom = (2.0 * alpha - 1.0) * s + alpha * xi;
  if (denom >= 0.0) return -std::numeric_limits<double>::infinity();
  const double p = -2.0 * s * (2.0 * alpha + (1.0 - alpha) * xi + 1.0) / denom;
  const double q = (2.0 * s * (2.0 - xi) - xi * xi) / denom;
  const double disc = 0.25 * p * p - q;
  if (disc < -1e-12) {
    throw Error(ErrorCode::DomainError, "negative discriminant in the boundary formula");
  }
  return -0.5 * p - std::sqrt(std::max(disc, 0.0));
}

/// The step size dt* at which (-dt a, -dt b) crosses the MPRK22ncs(alpha)
/// stability boundary, i.e. R0(-dt a, -dt b) = -1. Bisection runs until the
/// bracket is a few ulps wide (well inside 1e-12 absolute), so R0(dt*) sits
/// within the 1e-12 boundary band used by classify.
inline double critical_time_step(double a, double b, double alpha) {
  detail::require_sub_unit_alpha(alpha);
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw Error(ErrorCode::InvalidParameter, "rates must be positive");
  }
  const auto excess = [&](double dt) { return stability_r0({-dt * a, -dt * b}, alpha) + 1.0; };

  double lo = 0.0;
  double hi = 1e-6;
  while (excess(hi) >= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw Error(ErrorCode::BracketFailure, "no sign change of R0 + 1 for dt <= 1e6");
  }
  const auto bracket = boost::math::tools::bisect(
      excess, lo, hi, [](double l, double r) {
        return std::abs(r - l) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(l), std::abs(r));
      });
  return 0.5 * (bracket.first + bracket.second);
}

struct StabilityVerdict {
  double r_value;
  bool stable;       // |R| < 1 and not within the boundary band
  bool on_boundary;  // ||R| - 1| <= 1e-12
};

inline StabilityVerdict classify(ScaledStepPoint pt, const SchemeParams& params) {
  if (!(pt.z_a < 0.0) || !(pt.z_b < 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "classification requires z_a, z_b < 0");
  }
  const double r = stability_function(pt, params);
  const bool on_boundary = std::abs(std::abs(r) - 1.0) <= 1e-12;
  return {r, !on_boundary && std::abs(r) < 1.0, on_boundary};
}

/// MPRK22ncs(alpha) stability over the lattice z_k = z_min + k (-z_min) / resolution,
/// k = 0..resolution-1, in both coordinates.
class RegionRaster {
 public:
  RegionRaster(double alpha, double z_min, std::size_t resolution)
      : alpha_(alpha), z_min_(z_min), resolution_(resolution), cells_(resolution * resolution, 0) {}

  double alpha() const noexcept { return alpha_; }
  double z_min() const noexcept { return z_min_; }
  std::size_t resolution() const noexcept { return resolution_; }
  double spacing() const noexcept { return -z_min_ / static_cast<double>(resolution_); }
  double coordinate(std::size_t k) const noexcept { return z_min_ + static_cast<double>(k) * spacing(); }

  bool stable(std::size_t ia, std::size_t ib) const { return cells_.at(ib * resolution_ + ia) != 0; }
  void set(std::size_t ia, std::size_t ib, bool value) { cells_.at(ib * resolution_ + ia) = value ? 1 : 0; }

  std::size_t stable_count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
  }

 private:
  double alpha_;
  double z_min_;
  std::size_t resolution_;
  std::vector<std::uint8_t> cells_;
};

inline RegionRaster raster_region(double alpha, double z_min, std::size_t resolution) {
  if (!(z_min < 0.0) || !std::isfinite(z_min)) throw Error(ErrorCode::InvalidParameter, "z_min must be negative");
  if (resolution < 2) throw Error(ErrorCode::InvalidParameter, "resolution must be at least 2");
  const SchemeParams params(alpha, StageVariant::NonConservativeStages);
  RegionRaster raster(alpha, z_min, resolution);
  for (std::size_t ib = 0; ib < resolution; ++ib) {
    for (std::size_t ia = 0; ia < resolution; ++ia) {
      raster.set(ia, ib, classify({raster.coordinate(ia), raster.coordinate(ib)}, params).stable);
    }
  }
  return raster;
}

/// Central differences (map(y + h e_j) - map(y - h e_j)) / (2h), column by column.
template <typename Map>
Matrix finite_difference_jacobian(Map&& map, const StateVector& y, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidParameter, "difference step must be positive");
  const Eigen::Index n = y.size();
  Matrix jac(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    StateVector plus = y;
    StateVector minus = y;
    plus[j] += h;
    minus[j] -= h;
    const StateVector fp = map(plus);
    const StateVector fm = map(minus);
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

/// Roots of the characteristic polynomial of a 2x2 matrix, larger real part first.
inline std::array<std::complex<double>, 2> eigenvalues_2x2(const Eigen::Matrix2d& m) {
  const double half_tr = 0.5 * (m(0, 0) + m(1, 1));
  const double half_gap = 0.5 * (m(0, 0) - m(1, 1));
  // tr^2/4 - det written without the cancellation between the two terms
  const double disc = half_gap * half_gap + m(0, 1) * m(1, 0);
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    return {std::complex<double>(half_tr + root, 0.0), std::complex<double>(half_tr - root, 0.0)};
  }
  const double root = std::sqrt(-disc);
  return {std::complex<double>(half_tr, root), std::complex<double>(half_tr, -root)};
}

struct SpectralCheck {
  double eig_one;        // (S^-1 J S)_11, the eigenvalue along y*
  double eig_r;          // (S^-1 J S)_22, the eigenvalue along (1, -1)
  double diag_residual;  // largest off-diagonal magnitude of S^-1 J S
};

/// Transforms J into the basis S = (y*, (1, -1)).
inline SpectralCheck spectral_check(const Eigen::Matrix2d& jac, const StateVector& y_star) {
  require_positive(y_star, "steady state");
  Eigen::Matrix2d s;
  s << y_star[0], 1.0, y_star[1], -1.0;
  const Eigen::Matrix2d d = s.inverse() * jac * s;
  return {d(0, 0), d(1, 1), std::max(std::abs(d(0, 1)), std::abs(d(1, 0)))};
}

}  // namespace mprk

#endif  // MPRK_STABILITY_HPP
