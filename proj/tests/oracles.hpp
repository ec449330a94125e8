#pragma once

// Reference implementations used only by the test suite. Each oracle takes an
// independent numerical route from the library code it checks: series matrix
// exponentials instead of closed forms, explicit ODE integration instead of
// transition matrices, dense sampling instead of analytic projections.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "covsim/coverage.hpp"
#include "covsim/demand.hpp"

namespace oracles {

// Matrix exponential by scaling-and-squaring on a plain Taylor series.
inline Eigen::MatrixXd expm_series(Eigen::MatrixXd M) {
  const double nrm = M.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (nrm > 0.25) {
    squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.25)));
    M /= std::pow(2.0, squarings);
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(M.rows(), M.cols());
  Eigen::MatrixXd term = out;
  for (int k = 1; k <= 30; ++k) {
    term = (term * M) / static_cast<double>(k);
    out += term;
  }
  for (int i = 0; i < squarings; ++i) out = out * out;
  return out;
}

// Exact ZOH pair via the augmented-matrix exponential
// expm([[A, B], [0, 0]] * dt) = [[Ad, Bd], [0, I]].
inline std::pair<Eigen::Matrix4d, Eigen::Matrix<double, 4, 2>> zoh_series(
    const Eigen::Matrix4d& A, const Eigen::Matrix<double, 4, 2>& B, double dt) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(6, 6);
  M.topLeftCorner(4, 4) = A;
  M.topRightCorner(4, 2) = B;
  Eigen::MatrixXd E = expm_series(M * dt);
  return {E.topLeftCorner(4, 4), E.topRightCorner(4, 2)};
}

// Fixed-step RK4 for q' = A q + B u with constant input, refined by step
// doubling until two consecutive grids agree to `tol`.
inline Eigen::Vector4d integrate_linear(const Eigen::Matrix4d& A,
                                        const Eigen::Matrix<double, 4, 2>& B,
                                        Eigen::Vector4d q0, const Eigen::Vector2d& u,
                                        double t_final, double tol = 1e-11) {
  auto run = [&](int steps) {
    const double h = t_final / steps;
    Eigen::Vector4d q = q0;
    const Eigen::Vector4d bu = B * u;
    for (int i = 0; i < steps; ++i) {
      Eigen::Vector4d k1 = A * q + bu;
      Eigen::Vector4d k2 = A * (q + 0.5 * h * k1) + bu;
      Eigen::Vector4d k3 = A * (q + 0.5 * h * k2) + bu;
      Eigen::Vector4d k4 = A * (q + h * k3) + bu;
      q += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return q;
  };
  int steps = 512;
  Eigen::Vector4d prev = run(steps);
  for (int round = 0; round < 12; ++round) {
    steps *= 2;
    Eigen::Vector4d next = run(steps);
    if ((next - prev).norm() < tol) return next;
    prev = next;
  }
  return prev;
}

// Half-angle at the Earth's center subtended by a nadir-pointing cone of
// half-angle fov/2 from orbital radius r_s, found by explicit ray-sphere
// intersection (no law-of-sines shortcut).
inline double footprint_half_angle_geom(double fov, double r_s, double r_e) {
  // Satellite at (r_s, 0); boresight toward the origin. Cone edge ray
  // direction rotated by fov/2 from nadir.
  const double half = fov / 2.0;
  const double dx = -std::cos(half);
  const double dy = std::sin(half);
  // Solve |S + t d| = r_e for the nearer root.
  const double b = 2.0 * (r_s * dx);
  const double c = r_s * r_s - r_e * r_e;
  const double disc = b * b - 4.0 * c;
  if (disc < 0.0) throw std::domain_error("cone misses the ground sphere");
  const double t = (-b - std::sqrt(disc)) / 2.0;
  const double gx = r_s + t * dx;
  const double gy = t * dy;
  return std::atan2(gy, gx);
}

// Dense-grid reference for the ring-wide coverage cost: a uniform angular
// grid fine enough to flatten the kink error of the piecewise-linear
// intensity, with the rotation realized as an exact index shift.
inline double potential_dense(const std::vector<covsim::CoverageProfile>& profiles,
                              const covsim::DemandModel& demand, int n_theta = 1 << 17,
                              int n_tau = 128) {
  if (n_theta % n_tau != 0) throw std::invalid_argument("n_tau must divide n_theta");
  const double h = covsim::two_pi / n_theta;
  std::vector<double> rho(n_theta), mu(n_theta);
  for (int j = 0; j < n_theta; ++j) {
    rho[j] = covsim::aggregate_intensity(profiles, j * h);
    mu[j] = demand(j * h);
  }
  const int stride = n_theta / n_tau;
  double acc = 0.0;
  for (int m = 0; m < n_tau; ++m) {
    const int shift = m * stride;
    double inner = 0.0;
    for (int j = 0; j < n_theta; ++j) {
      const double d = rho[j] - mu[(j + shift) % n_theta];
      inner += d * d;
    }
    acc += inner;
  }
  return acc * h / (2.0 * n_tau);
}

// Dense reference for a cost restricted to explicit angular segments:
// composite trapezoid per segment (endpoints included, so region edges are
// exact), period-averaged against the rotating demand.
inline double regional_cost_dense(const std::vector<covsim::CoverageProfile>& beta,
                                  const std::vector<std::pair<double, double>>& segments,
                                  const covsim::DemandModel& demand, double omega,
                                  double period, int pts_per_circle = 1 << 17,
                                  int n_tau = 128) {
  double acc = 0.0;
  for (int m = 0; m < n_tau; ++m) {
    const double shift = omega * (m * period / n_tau);
    double inner = 0.0;
    for (const auto& [a, b] : segments) {
      const int n = std::max(2, static_cast<int>(std::lround((b - a) / covsim::two_pi *
                                                             pts_per_circle)));
      const double hs = (b - a) / n;
      double seg = 0.0;
      for (int j = 0; j <= n; ++j) {
        const double t = a + j * hs;
        const double d = covsim::aggregate_intensity(beta, t) - demand(t + shift);
        seg += (j == 0 || j == n ? 0.5 : 1.0) * d * d;
      }
      inner += seg * hs;
    }
    acc += inner;
  }
  return acc / (2.0 * n_tau);
}

// Finite-horizon tracking regulator by backward Riccati recursion on the
// target-augmented state [q; 1]. Independent of the condensed formulation:
// time-varying gains, forward simulation, cost accumulated directly.
struct RiccatiRun {
  std::vector<covsim::Vec2> inputs;
  std::vector<covsim::Vec4> states;
  double cost = 0.0;        // forward-accumulated
  double value = 0.0;       // z0' P0 z0 from the recursion, equals cost
};

inline RiccatiRun riccati_tracking(const covsim::Vec4& q0, const covsim::Vec4& target,
                                   const covsim::DiscreteSystem& sys,
                                   const covsim::Mat4& state_weight,
                                   const Eigen::Matrix2d& input_weight, int horizon) {
  using Mat5 = Eigen::Matrix<double, 5, 5>;
  using Mat52 = Eigen::Matrix<double, 5, 2>;
  using Vec5 = Eigen::Matrix<double, 5, 1>;

  Mat5 a5 = Mat5::Identity();
  a5.topLeftCorner<4, 4>() = sys.a_mat;
  Mat52 b5 = Mat52::Zero();
  b5.topRows<4>() = sys.b_mat;
  Mat5 q5 = Mat5::Zero();
  q5.topLeftCorner<4, 4>() = state_weight;
  q5.topRightCorner<4, 1>() = -state_weight * target;
  q5.bottomLeftCorner<1, 4>() = (-state_weight * target).transpose();
  q5(4, 4) = target.dot(state_weight * target);

  Mat5 p = q5;
  std::vector<Eigen::Matrix<double, 2, 5>> gains(horizon);
  for (int k = horizon - 1; k >= 0; --k) {
    const Eigen::Matrix2d m = input_weight + b5.transpose() * p * b5;
    gains[k] = m.ldlt().solve(b5.transpose() * p * a5);
    p = q5 + a5.transpose() * p * (a5 - b5 * gains[k]);
    p = 0.5 * (p + p.transpose().eval());
  }

  RiccatiRun run;
  Vec5 z;
  z << q0, 1.0;
  run.value = z.dot(p * z);
  run.cost = (q0 - target).dot(state_weight * (q0 - target));
  run.states.push_back(q0);
  for (int k = 0; k < horizon; ++k) {
    const covsim::Vec2 u = -gains[k] * z;
    run.inputs.push_back(u);
    z.head<4>() = sys.a_mat * z.head<4>() + sys.b_mat * u;
    run.states.push_back(z.head<4>());
    const covsim::Vec4 err = z.head<4>() - target;
    run.cost += err.dot(state_weight * err) + u.dot(input_weight * u);
  }
  return run;
}

}  // namespace oracles

