#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "covsim/geometry.hpp"
#include "covsim/orbit.hpp"

namespace covsim {

/**
 * @brief Half-angle of ground coverage, measured at the Earth's center, for a
 * nadir-pointing sensor cone of full opening `fov` observed from the orbit
 * radius.
 *
 * Throws std::domain_error when the cone edge misses the ground sphere, i.e.
 * sin(fov/2) > earth_radius / orbit_radius.
 */
inline double footprint_half_angle(double fov, const OrbitParams& orbit) {
  if (!(fov > 0.0) || !(fov < pi))
    throw std::invalid_argument("coverage: fov must lie in (0, pi)");
  const double s = (orbit.orbit_radius / orbit.earth_radius) * std::sin(fov / 2.0);
  if (s > 1.0)
    throw std::domain_error("coverage: sensor cone misses the ground sphere");
  return std::asin(s) - fov / 2.0;
}

/**
 * @brief Triangular coverage intensity of one satellite over ground angle.
 *
 * The profile peaks at the satellite's configuration angle and falls linearly
 * to zero at `half_width` on either side. All evaluation is 2*pi-periodic.
 */
struct CoverageProfile {
  double center = 0.0;      // configuration angle, rad (any real value)
  double half_width = 0.0;  // footprint half-angle alpha, rad
  double peak = 0.0;        // intensity at the center

  double slope() const { return peak / half_width; }

  double intensity(double theta) const {
    const double d = std::abs(wrap_pi(theta - center));
    if (d >= half_width) return 0.0;
    return peak * (1.0 - d / half_width);
  }

  // Whole footprint, an arc of length 2 * half_width centered on the
  // satellite.
  ArcInterval support() const {
    return ArcInterval{wrap_two_pi(center - half_width), 2.0 * half_width};
  }
  // Leading half of the footprint, ahead of the satellite.
  ArcInterval leading() const {
    return ArcInterval{wrap_two_pi(center), half_width};
  }
  // Trailing half, behind the satellite.
  ArcInterval trailing() const {
    return ArcInterval{wrap_two_pi(center - half_width), half_width};
  }

  void validate() const {
    if (!(half_width > 0.0))
      throw std::invalid_argument("coverage: half_width must be > 0");
    if (!(peak >= 0.0)) throw std::invalid_argument("coverage: peak must be >= 0");
  }
};

// Total intensity from a set of profiles at one ground angle.
inline double aggregate_intensity(const std::vector<CoverageProfile>& profiles,
                                  double theta) {
  double acc = 0.0;
  for (const auto& p : profiles) acc += p.intensity(theta);
  return acc;
}

}  // namespace covsim
