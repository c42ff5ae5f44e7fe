#ifndef MPRK_MPRK22_HPP
#define MPRK_MPRK22_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mprk/error.hpp"
#include "mprk/linalg.hpp"
#include "mprk/pds.hpp"

namespace mprk {

/// gamma = 1 (MPRK22) or gamma = 0 (MPRK22ncs) in the stage equation.
enum class StageVariant { ConservativeStages, NonConservativeStages };

inline std::string_view short_name(StageVariant v) {
  return v == StageVariant::ConservativeStages ? "cs" : "ncs";
}

class SchemeParams {
 public:
  SchemeParams(double alpha, StageVariant variant) : alpha_(alpha), variant_(variant) {
    if (!std::isfinite(alpha) || alpha < 0.5) {
      throw Error(ErrorCode::InvalidParameter,
                  "scheme parameter alpha must satisfy alpha >= 1/2, got " + std::to_string(alpha));
    }
  }

  double alpha() const noexcept { return alpha_; }
  StageVariant variant() const noexcept { return variant_; }
  double gamma() const noexcept { return variant_ == StageVariant::ConservativeStages ? 1.0 : 0.0; }
  bool conservative_stages() const noexcept { return variant_ == StageVariant::ConservativeStages; }

  /// Weight 1/(2 alpha) of the stage-value production in the final update.
  double stage_weight() const noexcept { return 0.5 / alpha_; }

 private:
  double alpha_;
  StageVariant variant_;
};

struct StepResult {
  StateVector next;
  StateVector stage;
  double step_size;
};

namespace detail {

inline void require_step_size(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorCode::InvalidParameter, "step size must be positive and finite");
  }
}

inline void require_solved_positive(const StateVector& y, const char* what) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) {
      throw Error(ErrorCode::NumericalBreakdown,
                  std::string(what) + " component " + std::to_string(i) + " = " +
                      std::to_string(y[i]) + " is not positive");
    }
  }
}

}  // namespace detail

/// sigma_i = (stage_i)^(1/alpha) * (start_i)^(1 - 1/alpha), evaluated in log space.
inline StateVector patankar_denominator(const StateVector& stage, const StateVector& start, double alpha) {
  if (alpha == 1.0) return stage;
  const double p = 1.0 / alpha;
  StateVector sigma(stage.size());
  for (Eigen::Index i = 0; i < stage.size(); ++i) {
    sigma[i] = std::exp(p * std::log(stage[i]) + (1.0 - p) * std::log(start[i]));
  }
  return sigma;
}

/// One MPRK22(alpha) / MPRK22ncs(alpha) step for a general conservative PDS.
///
/// The Patankar weights are frozen at known values, so the stage and the
/// final update are each one N x N M-matrix solve. Every solved component must
/// come out strictly positive; anything else (underflow, in practice) is
/// reported as NumericalBreakdown.
inline StepResult mprk22_step(const ProductionSystem& system, const StateVector& y, double dt,
                              const SchemeParams& params) {
  require_positive(y, "input state");
  detail::require_step_size(dt);
  if (static_cast<std::size_t>(y.size()) != system.dimension()) {
    throw Error(ErrorCode::InvalidParameter, "state dimension does not match the system");
  }
  const Eigen::Index n = y.size();
  const double alpha = params.alpha();
  const StateVector inv_y = y.cwiseInverse();

  // Stage: (I + alpha dt (D - gamma P) diag(1/y)) y2 = y + alpha dt (1 - gamma) P 1,
  // with D = diag of the column sums of P.
  const Matrix p1 = system.production(y);
  const StateVector destruction1 = p1.colwise().sum().transpose();
  StateVector stage_rhs = y;
  ColumnDominantMMatrix stage_system{Matrix::Zero(n, n), StateVector::Ones(n)};
  if (params.conservative_stages()) {
    stage_system.off_diagonal = -alpha * dt * p1 * inv_y.asDiagonal();
  } else {
    stage_system.excess += alpha * dt * destruction1.cwiseProduct(inv_y);
    stage_rhs += alpha * dt * p1.rowwise().sum();
  }
  StateVector stage = solve_mmatrix(stage_system, stage_rhs);
  detail::require_solved_positive(stage, "stage");

  // Final: (I + dt (D~ - P~) diag(1/sigma)) y_next = y with the blended productions P~.
  const Matrix p2 = system.production(stage);
  const double w = params.stage_weight();
  const Matrix blended = (1.0 - w) * p1 + w * p2;
  const StateVector sigma = patankar_denominator(stage, y, alpha);
  const ColumnDominantMMatrix final_system{-dt * blended * sigma.cwiseInverse().asDiagonal(), StateVector::Ones(n)};
  StateVector next = solve_mmatrix(final_system, y);
  detail::require_solved_positive(next, "updated state");
  return {std::move(next), std::move(stage), dt};
}

/// One step for a linear PDS y' = A y in matrix form:
/// stage = B_gamma y and M(y) y_next = y with
/// M(y) = I - dt A diag(C_gamma y) diag(sigma(y))^-1.
inline StepResult mprk22_step_linear(const LinearPDSMatrix& a, const StateVector& y, double dt,
                                     const SchemeParams& params) {
  require_positive(y, "input state");
  detail::require_step_size(dt);
  if (y.size() != a.dimension()) {
    throw Error(ErrorCode::InvalidParameter, "state dimension does not match the system");
  }
  const Eigen::Index n = y.size();
  const double alpha = params.alpha();
  const ProductionSplit split = production_split(a);

  StateVector stage;
  if (params.conservative_stages()) {
    stage = solve_mmatrix({-alpha * dt * split.production, StateVector::Ones(n)}, y);
  } else {
    stage = (y + alpha * dt * split.production * y).cwiseQuotient(
        (StateVector::Ones(n) + alpha * dt * split.destruction.diagonal()));
  }
  detail::require_solved_positive(stage, "stage");

  const double w = params.stage_weight();
  const StateVector c_y = (1.0 - w) * y + w * stage;
  const StateVector sigma = patankar_denominator(stage, y, alpha);
  // M(y) = I - dt A diag(C y) diag(sigma)^-1 has off-diagonal part -dt A_P diag(C y / sigma)
  // and unit column excess because the columns of A sum to zero.
  StateVector next = solve_mmatrix({-dt * split.production * c_y.cwiseQuotient(sigma).asDiagonal(), StateVector::Ones(n)}, y);
  detail::require_solved_positive(next, "updated state");
  return {std::move(next), std::move(stage), dt};
}

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  SchemeParams params;
  double step_size;
};

struct StepFailure {
  std::size_t step_index;  // index of the step that failed (1-based: step k produces states[k])
  ErrorCode code;
  std::string message;
};

struct IntegrationResult {
  Trajectory trajectory;              // complete, or the prefix computed before a failure
  std::optional<StepFailure> failure;

  bool ok() const noexcept { return !failure.has_value(); }
};

/// Runs `n_steps` fixed steps of size dt. `step` is any callable
/// (const StateVector&, double, const SchemeParams&) -> StepResult.
template <typename StepFn>
IntegrationResult integrate(StepFn&& step, const StateVector& y0, double dt, std::size_t n_steps,
                            const SchemeParams& params) {
  require_positive(y0, "initial state");
  detail::require_step_size(dt);
  IntegrationResult result{Trajectory{{0.0}, {y0}, params, dt}, std::nullopt};
  result.trajectory.times.reserve(n_steps + 1);
  result.trajectory.states.reserve(n_steps + 1);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    try {
      StepResult r = step(result.trajectory.states.back(), dt, params);
      result.trajectory.states.push_back(std::move(r.next));
      result.trajectory.times.push_back(static_cast<double>(k) * dt);
    } catch (const Error& e) {
      result.failure = StepFailure{k, e.code(), e.what()};
      break;
    }
  }
  return result;
}

/// Step callable for a general production system.
inline auto stepper(const ProductionSystem& system) {
  return [&system](const StateVector& y, double dt, const SchemeParams& params) {
    return mprk22_step(system, y, dt, params);
  };
}

/// Step callable for a linear PDS, using the matrix form.
inline auto stepper(const LinearPDSMatrix& a) {
  return [&a](const StateVector& y, double dt, const SchemeParams& params) {
    return mprk22_step_linear(a, y, dt, params);
  };
}

}  // namespace mprk

#endif  // MPRK_MPRK22_HPP
