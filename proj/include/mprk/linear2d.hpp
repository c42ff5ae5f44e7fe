#ifndef MPRK_LINEAR2D_HPP
#define MPRK_LINEAR2D_HPP

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "mprk/error.hpp"
#include "mprk/mprk22.hpp"
#include "mprk/pds.hpp"

namespace mprk {

/// The 2x2 test problem y' = A y with A = [[-a, b], [a, -b]], a, b >= 0, a + b > 0.
/// Every positive and conservative linear 2x2 PDS has this form.
class Linear2x2PDS {
 public:
  Linear2x2PDS(double a, double b) : a_(a), b_(b) {
    if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || b < 0.0 || !(a + b > 0.0)) {
      throw Error(ErrorCode::InvalidParameter, "rates must satisfy a, b >= 0 and a + b > 0");
    }
  }

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  /// The nonzero eigenvalue of A.
  double lambda() const noexcept { return -(a_ + b_); }

  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << -a_, b_, a_, -b_;
    return m;
  }

  LinearPDSMatrix pds_matrix() const { return LinearPDSMatrix(Matrix(matrix())); }

  bool interior_steady_states() const noexcept { return a_ > 0.0 && b_ > 0.0; }

 private:
  double a_;
  double b_;
};

inline StateVector exact_solution(const Linear2x2PDS& p, const StateVector& y0, double t) {
  require_positive(y0, "initial state");
  if (y0.size() != 2) throw Error(ErrorCode::InvalidParameter, "test problem state must have 2 components");
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidParameter, "time must be nonnegative");
  const double a = p.a();
  const double b = p.b();
  const double s = a + b;
  const double mass_part = (y0[0] + y0[1]) / s;
  const double transient = (a * y0[0] - b * y0[1]) / s * std::exp(p.lambda() * t);
  StateVector y(2);
  y << mass_part * b + transient, mass_part * a - transient;
  return y;
}

inline StateVector steady_state(const Linear2x2PDS& p, const StateVector& y0) {
  require_positive(y0, "initial state");
  if (y0.size() != 2) throw Error(ErrorCode::InvalidParameter, "test problem state must have 2 components");
  if (!p.interior_steady_states()) {
    throw Error(ErrorCode::DegenerateSteadyState,
                "a = 0 or b = 0: the steady state lies on the boundary of the positive orthant");
  }
  const double scale = (y0[0] + y0[1]) / (p.a() + p.b());
  StateVector y(2);
  y << scale * p.b(), scale * p.a();
  return y;
}

/// B_1 = (I - alpha dt A)^-1,  B_0 = (I + alpha dt A_D)^-1 (I + alpha dt A_P).
inline Eigen::Matrix2d b_gamma(const Linear2x2PDS& p, double dt, const SchemeParams& params) {
  detail::require_step_size(dt);
  const double h = params.alpha() * dt;
  const double a = p.a();
  const double b = p.b();
  Eigen::Matrix2d out;
  if (params.conservative_stages()) {
    // I - hA = [[1 + ha, -hb], [-ha, 1 + hb]], det = 1 + h(a + b)
    const double det = 1.0 + h * (a + b);
    if (!(std::abs(det) > 1e-300)) throw Error(ErrorCode::SingularSystem, "I - alpha dt A is singular");
    out << 1.0 + h * b, h * b, h * a, 1.0 + h * a;
    out /= det;
  } else {
    out << 1.0 / (1.0 + h * a), h * b / (1.0 + h * a), h * a / (1.0 + h * b), 1.0 / (1.0 + h * b);
  }
  return out;
}

inline Eigen::Matrix2d c_gamma(const Linear2x2PDS& p, double dt, const SchemeParams& params) {
  const double w = params.stage_weight();
  return (1.0 - w) * Eigen::Matrix2d::Identity() + w * b_gamma(p, dt, params);
}

struct MapEvaluation {
  StateVector output;
  StateVector stage;
  Eigen::Vector2d tau;
  Eigen::Vector2d sigma;
  double denominator;
};

namespace detail {

inline void require_interior(const Linear2x2PDS& p) {
  if (!p.interior_steady_states()) {
    throw Error(ErrorCode::DegenerateSteadyState,
                "closed-form step map requires a > 0 and b > 0; use the generic integrator");
  }
}

inline void require_pair(const StateVector& y) {
  if (y.size() != 2) throw Error(ErrorCode::InvalidParameter, "test problem state must have 2 components");
}

}  // namespace detail

/// The closed-form step map g(y) = (I + dt / d(y) * A diag(tau(y))) y
/// with d(y) = 1 + dt (a tau_1 + b tau_2) and tau_i = (C y)_i / sigma_i.
inline MapEvaluation map_g(const Linear2x2PDS& p, double dt, const SchemeParams& params, const StateVector& y) {
  detail::require_pair(y);
  require_positive(y, "state");
  detail::require_interior(p);
  detail::require_step_size(dt);
  const Eigen::Vector2d y2 = y;
  const Eigen::Vector2d stage = b_gamma(p, dt, params) * y2;
  const double w = params.stage_weight();
  const Eigen::Vector2d c_y = (1.0 - w) * y2 + w * stage;
  const Eigen::Vector2d sigma = patankar_denominator(StateVector(stage), StateVector(y2), params.alpha());
  const Eigen::Vector2d tau = c_y.cwiseQuotient(sigma);
  const double denominator = 1.0 + dt * (p.a() * tau[0] + p.b() * tau[1]);
  const Eigen::Vector2d out = y2 + (dt / denominator) * (p.matrix() * tau.cwiseProduct(y2));
  return {StateVector(out), StateVector(stage), tau, sigma, denominator};
}

/// M(y) = I - dt A diag(C y) diag(sigma(y))^-1, the final-update system matrix.
inline Eigen::Matrix2d patankar_matrix(const Linear2x2PDS& p, double dt, const SchemeParams& params,
                                       const StateVector& y) {
  const MapEvaluation e = map_g(p, dt, params, y);
  return Eigen::Matrix2d::Identity() - dt * p.matrix() * e.tau.asDiagonal();
}

/// M(y)^-1 = I + (1 - tr K)^-1 K with K = dt A diag(tau), valid because A has rank one.
inline Eigen::Matrix2d patankar_matrix_inverse(const Linear2x2PDS& p, double dt, const SchemeParams& params,
                                               const StateVector& y) {
  const MapEvaluation e = map_g(p, dt, params, y);
  const Eigen::Matrix2d k = dt * p.matrix() * e.tau.asDiagonal();
  return Eigen::Matrix2d::Identity() + k / (1.0 - k.trace());
}

/// Dg(y*) = I + dt / (1 + dt (a + b)) * A (I + (I - B_gamma) / (2 alpha)).
inline Eigen::Matrix2d jacobian_at_steady_state(const Linear2x2PDS& p, double dt, const SchemeParams& params,
                                                const StateVector& y_star) {
  detail::require_pair(y_star);
  require_positive(y_star, "steady state");
  detail::require_step_size(dt);
  const Eigen::Matrix2d a = p.matrix();
  const Eigen::Vector2d ys = y_star;
  if ((a * ys).norm() > 1e-12 * ys.norm()) {
    throw Error(ErrorCode::NotASteadyState, "A y* is not zero");
  }
  const Eigen::Matrix2d identity = Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d inner = identity + params.stage_weight() * (identity - b_gamma(p, dt, params));
  return identity + dt / (1.0 + dt * (p.a() + p.b())) * a * inner;
}

/// Amplification factor R(z) of both schemes on y1' = -a y1, y2' = a y1 (b = 0), z = -dt a:
/// y1_next = R(z) y1.
inline double degenerate_amplification(double z, double alpha) {
  if (!(z < 0.0) || !std::isfinite(z)) throw Error(ErrorCode::InvalidParameter, "z must be negative");
  if (!(alpha >= 0.5) || !std::isfinite(alpha)) throw Error(ErrorCode::InvalidParameter, "alpha must be >= 1/2");
  const double base = std::pow(1.0 - alpha * z, 1.0 - 1.0 / alpha);
  return base / (base - z * (1.0 - (alpha - 0.5) * z));
}

}  // namespace mprk

#endif  // MPRK_LINEAR2D_HPP
