#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "covsim/orbit.hpp"

namespace covsim {

/**
 * @brief Settings for the input-constrained tracking stage.
 *
 * The horizon covers horizon*dt time units. `input_bound` limits the 2-norm
 * of each commanded acceleration; +infinity disables the constraint. The
 * waypoint count splits a maneuver into equally spaced arc legs.
 */
struct ControlParams {
  double dt = 0.6;                               // [TU]
  int horizon = 30;                              // steps
  Mat4 state_weight = state_weight_default();    // penalty on q - q_target
  Eigen::Matrix2d input_weight = Eigen::Matrix2d::Identity();
  double input_bound = 0.01;                     // [DU/TU^2]
  double arrive_eps = 1e-3;                      // waypoint arrival radius
  int waypoint_count = 3;

  static Mat4 state_weight_default() {
    Mat4 q = Mat4::Identity();
    q(0, 0) = 10.0;
    q(1, 1) = 10.0;
    return q;
  }

  void validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("control: dt must be > 0");
    if (horizon < 1) throw std::invalid_argument("control: horizon must be >= 1");
    if (!(input_bound > 0.0)) throw std::invalid_argument("control: input_bound must be > 0");
    if (!(arrive_eps > 0.0)) throw std::invalid_argument("control: arrive_eps must be > 0");
    if (waypoint_count < 1)
      throw std::invalid_argument("control: waypoint_count must be >= 1");
    Eigen::SelfAdjointEigenSolver<Mat4> qe(state_weight);
    if (qe.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("control: state weight must be positive definite");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> re(input_weight);
    if (re.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("control: input weight must be positive definite");
  }
};

struct ControlSolution {
  std::vector<Vec2> inputs;   // u_0 .. u_{N-1}
  std::vector<Vec4> states;   // q_0 .. q_N under those inputs
  double cost = 0.0;          // tracking error plus input effort, q_0 term included
  double residual = 0.0;      // projected-gradient fixed-point residual
  int iterations = 0;
  bool converged = false;
};

/**
 * @brief Finite-horizon tracking problem condensed over the input sequence.
 *
 * States are eliminated through the dynamics, leaving a quadratic in the
 * stacked inputs over a product of norm balls. Solved by accelerated
 * projected gradient with momentum restart on cost increase; the per-block
 * ball projection is closed-form. Building the condensed matrices is the
 * expensive part, so construct once per (system, params) pair and reuse.
 */
class CondensedLqr {
 public:
  CondensedLqr(const DiscreteSystem& sys, const ControlParams& params)
      : sys_(sys), params_(params) {
    params.validate();
    const int n = params.horizon;
    phi_.resize(4 * n, 4);
    gamma_ = Eigen::MatrixXd::Zero(4 * n, 2 * n);

    std::vector<Mat42> impulse(n);  // A^i B
    impulse[0] = sys.b_mat;
    for (int i = 1; i < n; ++i) impulse[i] = sys.a_mat * impulse[i - 1];
    Mat4 power = sys.a_mat;  // A^{k+1} while filling row block k
    for (int k = 0; k < n; ++k) {
      phi_.block<4, 4>(4 * k, 0) = power;
      power = sys.a_mat * power;
      for (int j = 0; j <= k; ++j)
        gamma_.block<4, 2>(4 * k, 2 * j) = impulse[k - j];
    }

    Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(4 * n, 4 * n);
    Eigen::MatrixXd effort = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
      weights.block<4, 4>(4 * k, 4 * k) = params.state_weight;
      effort.block<2, 2>(2 * k, 2 * k) = params.input_weight;
    }
    hessian_ = gamma_.transpose() * weights * gamma_ + effort;
    weighted_gamma_ = weights * gamma_;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian_);
    lipschitz_ = 2.0 * es.eigenvalues().maxCoeff();
    exact_.compute(hessian_);
  }

  /// Iteration cap of the accelerated projected-gradient loop.
  static constexpr int iteration_cap = 2000;
  /// Fixed-point residual below which a solve counts as converged.
  static constexpr double residual_tol = 1e-8;

  /**
   * @brief Solve from q0 toward q_target; warm stacked inputs are optional.
   *
   * Never throws on slow convergence: the cap leaves `converged` false with
   * the best iterate. Every returned input satisfies the norm bound.
   */
  ControlSolution solve(const Vec4& q0, const Vec4& q_target,
                        const Eigen::VectorXd* warm = nullptr) const {
    const int n = params_.horizon;
    Eigen::VectorXd target_stack(4 * n);
    for (int k = 0; k < n; ++k) target_stack.segment<4>(4 * k) = q_target;
    // Cost in U: U^T H U + 2 c^T U + const.
    const Eigen::VectorXd drift = phi_ * q0 - target_stack;
    const Eigen::VectorXd linear = weighted_gamma_.transpose() * drift;

    Eigen::VectorXd u = warm && warm->size() == 2 * n
                            ? project(*warm)
                            : Eigen::VectorXd::Zero(2 * n);
    Eigen::VectorXd y = u;
    double theta = 1.0;
    auto gradient = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      return 2.0 * (hessian_ * v + linear);
    };
    auto objective = [&](const Eigen::VectorXd& v) {
      return v.dot(hessian_ * v) + 2.0 * linear.dot(v);
    };

    ControlSolution sol;
    if (!std::isfinite(params_.input_bound)) {
      // Bound disabled: the minimizer solves H u = -c directly. The gradient
      // loop is kept for the constrained problem, where ball activity removes
      // the stiff directions; without it the conditioning is too poor for a
      // first-order method to reach the residual tolerance within the cap.
      u = exact_.solve(-linear);
      sol.iterations = 1;
      sol.residual = (u - project(u - gradient(u) / lipschitz_)).norm() / (1.0 + u.norm());
      sol.converged = sol.residual < residual_tol;
      return finish(sol, std::move(u), q0, q_target);
    }
    double best = objective(u);
    for (int it = 0; it < iteration_cap; ++it) {
      Eigen::VectorXd next = project(y - gradient(y) / lipschitz_);
      sol.iterations = it + 1;

      double value = objective(next);
      if (value > best) {
        // Momentum overshoot: restart with a plain step from the last
        // monotone point, which the descent property keeps non-increasing.
        next = project(u - gradient(u) / lipschitz_);
        value = objective(next);
        theta = 1.0;
      }
      const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      y = next + ((theta - 1.0) / theta_next) * (next - u);
      u = next;
      theta = theta_next;
      best = value;

      sol.residual = (u - project(u - gradient(u) / lipschitz_)).norm() / (1.0 + u.norm());
      if (sol.residual < residual_tol) {
        sol.converged = true;
        break;
      }
    }
    if (!sol.converged)
      sol.residual = (u - project(u - gradient(u) / lipschitz_)).norm() / (1.0 + u.norm());
    return finish(sol, std::move(u), q0, q_target);
  }

  const ControlParams& params() const { return params_; }
  const DiscreteSystem& system() const { return sys_; }
  double lipschitz() const { return lipschitz_; }

 private:
  ControlSolution finish(ControlSolution sol, Eigen::VectorXd u, const Vec4& q0,
                         const Vec4& q_target) const {
    const int n = params_.horizon;
    sol.inputs.resize(n);
    for (int k = 0; k < n; ++k) sol.inputs[k] = u.segment<2>(2 * k);
    sol.states.resize(n + 1);
    sol.states[0] = q0;
    for (int k = 0; k < n; ++k)
      sol.states[k + 1] = sys_.a_mat * sol.states[k] + sys_.b_mat * sol.inputs[k];

    sol.cost = (q0 - q_target).dot(params_.state_weight * (q0 - q_target));
    for (int k = 0; k < n; ++k) {
      const Vec4 err = sol.states[k + 1] - q_target;
      sol.cost += err.dot(params_.state_weight * err);
      sol.cost += sol.inputs[k].dot(params_.input_weight * sol.inputs[k]);
    }
    return sol;
  }

  Eigen::VectorXd project(Eigen::VectorXd v) const {
    const double bound = params_.input_bound;
    if (!std::isfinite(bound)) return v;
    for (int k = 0; k < v.size() / 2; ++k) {
      const double norm = v.segment<2>(2 * k).norm();
      if (norm > bound) v.segment<2>(2 * k) *= bound / norm;
    }
    return v;
  }

  DiscreteSystem sys_;
  ControlParams params_;
  Eigen::MatrixXd phi_;             // stacked powers of A
  Eigen::MatrixXd gamma_;           // input-to-state convolution
  Eigen::MatrixXd weighted_gamma_;  // state weights times gamma
  Eigen::MatrixXd hessian_;
  Eigen::LDLT<Eigen::MatrixXd> exact_;  // for bound-disabled solves
  double lipschitz_ = 0.0;
};

/// One-shot convenience wrapper around CondensedLqr.
inline ControlSolution solve_constrained_lqr(const Vec4& q0, const Vec4& q_target,
                                             const DiscreteSystem& sys,
                                             const ControlParams& params) {
  return CondensedLqr(sys, params).solve(q0, q_target);
}

struct WaypointPlan {
  std::vector<Vec2> points;  // on-circle, last equals the maneuver target
};

/**
 * @brief Splits a maneuver into equally spaced deviation-angle legs.
 *
 * Interpolation runs in the signed deviation angle, so the path follows the
 * feasible arc; the final entry is the target position verbatim.
 */
inline WaypointPlan make_waypoints(const Vec2& p_start, const Vec2& p_target,
                                   int count, const OrbitParams& orbit) {
  if (count < 1) throw std::invalid_argument("waypoints: count must be >= 1");
  const double bound = max_deviation_angle(orbit);
  const double d0 = deviation_angle(p_start, orbit);
  const double d1 = deviation_angle(p_target, orbit);
  for (const double d : {d0, d1})
    if (std::abs(d) > bound + 1e-9)
      throw std::invalid_argument("waypoints: endpoint outside the feasible arc");

  WaypointPlan plan;
  for (int j = 1; j < count; ++j)
    plan.points.push_back(circle_point(d0 + (d1 - d0) * j / count, orbit));
  plan.points.push_back(p_target);
  return plan;
}

enum class ManeuverStatus { completed, attacked, stalled };

struct ManeuverResult {
  std::vector<Vec4> trajectory;  // state per step, initial state included
  std::vector<Vec2> inputs;      // applied (first-of-horizon) inputs
  std::vector<int> arrival_steps;  // trajectory index at each waypoint arrival
  double control_cost = 0.0;     // sum of u^T R u dt over applied inputs
  ManeuverStatus status = ManeuverStatus::completed;
  int waypoints_reached = 0;
};

/// Queried at each waypoint arrival with the elapsed maneuver time [TU];
/// returning true reports a detected attack and interrupts the run.
using EventProbe = std::function<bool(double)>;

/**
 * @brief Receding-horizon drive through a waypoint plan.
 *
 * Each leg re-solves the tracking problem toward (waypoint, zero velocity),
 * applies the first input, and advances one step until the full state is
 * within arrive_eps; the attack probe runs only at arrivals. A leg exceeding
 * the step cap aborts with the partial trajectory and status `stalled`.
 */
inline ManeuverResult mwmpc_run(const RelativeState& start, const WaypointPlan& plan,
                                const DiscreteSystem& sys, const ControlParams& params,
                                const EventProbe& probe = {}) {
  constexpr int leg_step_cap = 10000;
  const CondensedLqr solver(sys, params);

  ManeuverResult run;
  Vec4 q = start.stacked();
  run.trajectory.push_back(q);
  double elapsed = 0.0;

  Eigen::VectorXd warm;
  for (const Vec2& waypoint : plan.points) {
    Vec4 q_target;
    q_target << waypoint(0), waypoint(1), 0.0, 0.0;

    int leg_steps = 0;
    warm.resize(0);
    while ((q - q_target).norm() >= params.arrive_eps) {
      if (++leg_steps > leg_step_cap) {
        run.status = ManeuverStatus::stalled;
        return run;
      }
      const ControlSolution sol =
          solver.solve(q, q_target, warm.size() ? &warm : nullptr);
      const Vec2 u = sol.inputs.front();
      run.inputs.push_back(u);
      run.control_cost += u.dot(params.input_weight * u) * params.dt;
      q = sys.a_mat * q + sys.b_mat * u;
      run.trajectory.push_back(q);
      elapsed += params.dt;

      // Shift the horizon solution one step for the next warm start.
      warm.resize(2 * params.horizon);
      for (int k = 0; k + 1 < params.horizon; ++k)
        warm.segment<2>(2 * k) =
            Eigen::Vector2d(sol.inputs[k + 1](0), sol.inputs[k + 1](1));
      warm.tail<2>().setZero();
    }
    ++run.waypoints_reached;
    run.arrival_steps.push_back(static_cast<int>(run.trajectory.size()) - 1);
    if (probe && probe(elapsed)) {
      run.status = ManeuverStatus::attacked;
      return run;
    }
  }
  run.status = ManeuverStatus::completed;
  return run;
}

}  // namespace covsim
