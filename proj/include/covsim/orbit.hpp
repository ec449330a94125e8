#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "covsim/geometry.hpp"

namespace covsim {

using Mat4 = Eigen::Matrix4d;
using Mat42 = Eigen::Matrix<double, 4, 2>;
using Vec4 = Eigen::Vector4d;
using Vec2 = Eigen::Vector2d;

/**
 * @brief Circular-orbit constants shared by every satellite of the ring.
 *
 * Canonical units: 1 DU = 1e6 m, 1 TU = 100 s.
 */
struct OrbitParams {
  double orbit_radius = 0.0;      // r_s [DU]
  double mean_motion = 0.0;       // omega [rad/TU]
  double period = 0.0;            // T_s = 2*pi/omega [TU]
  double earth_radius = 6.371;    // [DU]
  double grav_param = 3.986;      // [DU^3/TU^2]
  double max_displacement = 0.0;  // p_max, chord bound on |p| [DU]

  static OrbitParams from_altitude(double altitude, double max_displacement,
                                   double earth_radius = 6.371, double grav_param = 3.986) {
    OrbitParams op;
    op.earth_radius = earth_radius;
    op.grav_param = grav_param;
    op.orbit_radius = earth_radius + altitude;
    op.mean_motion = std::sqrt(grav_param / std::pow(op.orbit_radius, 3));
    op.period = two_pi / op.mean_motion;
    op.max_displacement = max_displacement;
    op.validate();
    return op;
  }

  void validate() const {
    if (!(orbit_radius > 0.0) || !(mean_motion > 0.0))
      throw std::invalid_argument("orbit params: radius and mean motion must be positive");
    if (std::abs(period * mean_motion - two_pi) > 1e-12 * two_pi)
      throw std::invalid_argument("orbit params: period inconsistent with mean motion");
    if (!(max_displacement > 0.0) || !(max_displacement < orbit_radius))
      throw std::invalid_argument("orbit params: require 0 < p_max < r_s");
  }
};

// In-plane relative state in the rotating chief frame, q = [p; v].
struct RelativeState {
  Vec2 pos = Vec2::Zero();  // [DU]
  Vec2 vel = Vec2::Zero();  // [DU/TU]

  Vec4 stacked() const {
    Vec4 q;
    q << pos(0), pos(1), vel(0), vel(1);
    return q;
  }
  static RelativeState from_stacked(const Vec4& q) {
    RelativeState s;
    s.pos << q(0), q(1);
    s.vel << q(2), q(3);
    return s;
  }
};

/**
 * @brief Continuous-time in-plane relative dynamics q' = A q + B u about a
 *        circular reference orbit with mean motion omega.
 */
inline std::pair<Mat4, Mat42> cw_continuous(double omega) {
  Mat4 A = Mat4::Zero();
  A(0, 2) = 1.0;
  A(1, 3) = 1.0;
  A(2, 0) = 3.0 * omega * omega;
  A(2, 3) = 2.0 * omega;
  A(3, 2) = -2.0 * omega;
  Mat42 B = Mat42::Zero();
  B(2, 0) = 1.0;
  B(3, 1) = 1.0;
  return {A, B};
}

struct DiscreteSystem {
  Mat4 a_mat = Mat4::Identity();
  Mat42 b_mat = Mat42::Zero();
  double dt = 0.0;  // [TU]
};

/**
 * @brief Exact zero-order-hold discretization of the relative dynamics.
 *
 * Uses the closed-form state transition matrix; A_d equals expm(A*dt) and
 * B_d its convolution with B. The mean motion is recovered from A(2,3).
 */
inline DiscreteSystem discretize(const Mat4& A, const Mat42& /*B*/, double dt) {
  if (!(dt >= 0.0)) throw std::invalid_argument("discretize: dt must be non-negative");
  const double w = A(2, 3) / 2.0;
  DiscreteSystem sys;
  sys.dt = dt;
  if (w < 1e-12) {
    // omega -> 0 limit: double integrator (A is nilpotent).
    sys.a_mat = Mat4::Identity();
    sys.a_mat(0, 2) = dt;
    sys.a_mat(1, 3) = dt;
    sys.b_mat << 0.5 * dt * dt, 0.0, 0.0, 0.5 * dt * dt, dt, 0.0, 0.0, dt;
    return sys;
  }
  const double c = std::cos(w * dt);
  const double s = std::sin(w * dt);
  Mat4& Ad = sys.a_mat;
  Ad << 4.0 - 3.0 * c, 0.0, s / w, 2.0 * (1.0 - c) / w,
      6.0 * (s - w * dt), 1.0, -2.0 * (1.0 - c) / w, (4.0 * s - 3.0 * w * dt) / w,
      3.0 * w * s, 0.0, c, 2.0 * s,
      -6.0 * w * (1.0 - c), 0.0, -2.0 * s, 4.0 * c - 3.0;
  Mat42& Bd = sys.b_mat;
  Bd << (1.0 - c) / (w * w), (2.0 / w) * (dt - s / w),
      -(2.0 / w) * (dt - s / w), 4.0 * (1.0 - c) / (w * w) - 1.5 * dt * dt,
      s / w, 2.0 * (1.0 - c) / w,
      -2.0 * (1.0 - c) / w, 4.0 * s / w - 3.0 * dt;
  return sys;
}

inline RelativeState propagate(const DiscreteSystem& sys, const RelativeState& state,
                               const Vec2& input) {
  return RelativeState::from_stacked(sys.a_mat * state.stacked() + sys.b_mat * input);
}

/**
 * @brief Signed angular deviation of a relative position from the chief slot.
 *
 * Measured at the Earth's center between the chief's radius vector and the
 * satellite's; positive toward the leading (+y) side and sgn(0) := +1.
 * Range (-pi, pi]. Throws std::domain_error at the Earth-center image
 * p = (-r_s, 0) where the angle is undefined.
 */
inline double deviation_angle(const Vec2& p, const OrbitParams& orbit) {
  const double ax = p(0) + orbit.orbit_radius;
  // Flush -0.0 so the on-axis convention sgn(0) := +1 holds exactly.
  const double ay = p(1) == 0.0 ? 0.0 : p(1);
  if (ax == 0.0 && ay == 0.0)
    throw std::domain_error("deviation angle undefined at the circle center");
  return std::atan2(ay, ax);
}

// Instantaneous configuration angle; kept unwrapped so callers can difference
// angles across the ring without seam corrections.
inline double configuration_angle(double initial_angle, const Vec2& p, double tau,
                                  const OrbitParams& orbit) {
  return initial_angle + deviation_angle(p, orbit) + orbit.mean_motion * tau;
}

// On-circle position with deviation angle delta (exact chord parametrization).
inline Vec2 circle_point(double delta, const OrbitParams& orbit) {
  return Vec2(orbit.orbit_radius * (std::cos(delta) - 1.0), orbit.orbit_radius * std::sin(delta));
}

// Deviation-angle bound equivalent to the chord bound |p| <= p_max.
inline double max_deviation_angle(const OrbitParams& orbit) {
  return 2.0 * std::asin(orbit.max_displacement / (2.0 * orbit.orbit_radius));
}

// Distance from the orbit circle (zero for valid configuration positions).
inline double circle_residual(const Vec2& p, const OrbitParams& orbit) {
  const double ax = p(0) + orbit.orbit_radius;
  return std::abs(std::hypot(ax, p(1)) - orbit.orbit_radius);
}

}  // namespace covsim
