#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "covsim/coverage.hpp"
#include "covsim/geometry.hpp"
#include "covsim/orbit.hpp"

namespace covsim {

/**
 * @brief Static description of one satellite in the ring.
 *
 * `initial_angle` is the chief's angle at the current planning epoch; the
 * satellite's instantaneous angle adds the deviation of its relative position
 * and the ring rotation.
 */
struct SatelliteSpec {
  int id = 0;
  double half_width = 0.0;    // coverage half-angle alpha [rad]
  double peak = 0.0;          // peak intensity psi_m
  double initial_angle = 0.0; // chief angle phi0 [rad], unwrapped
  bool anchored = false;
  bool alive = true;

  double slope() const { return peak / half_width; }

  void validate() const {
    if (!(half_width > 0.0) || !(half_width < pi))
      throw std::invalid_argument("satellite " + std::to_string(id) +
                                  ": half_width must lie in (0, pi)");
    if (!(peak > 0.0))
      throw std::invalid_argument("satellite " + std::to_string(id) +
                                  ": peak intensity must be > 0");
  }
};

/**
 * @brief A ring of satellites: specs plus relative positions, in ring order
 * along the direction of motion.
 *
 * Entries marked not alive stay in the roster (so ids keep meaning across
 * events) but are skipped by every coverage computation.
 */
struct Configuration {
  std::vector<SatelliteSpec> specs;
  std::vector<Vec2> positions;  // parallel to specs

  std::size_t size() const { return specs.size(); }

  std::size_t alive_count() const {
    std::size_t n = 0;
    for (const auto& s : specs) n += s.alive ? 1 : 0;
    return n;
  }

  std::size_t index_of(int id) const {
    for (std::size_t i = 0; i < specs.size(); ++i)
      if (specs[i].id == id) return i;
    throw std::out_of_range("no satellite with id " + std::to_string(id));
  }

  // Ring neighbors skip entries that are not alive.
  std::size_t prev_alive(std::size_t i) const { return step_alive(i, specs.size() - 1); }
  std::size_t next_alive(std::size_t i) const { return step_alive(i, 1); }

  // Instantaneous angle of satellite i at the planning epoch (tau = 0).
  double epoch_angle(std::size_t i, const OrbitParams& orbit) const {
    return specs[i].initial_angle + deviation_angle(positions[i], orbit);
  }

  CoverageProfile profile(std::size_t i, const OrbitParams& orbit, double tau = 0.0) const {
    const auto& s = specs[i];
    return CoverageProfile{epoch_angle(i, orbit) + orbit.mean_motion * tau,
                           s.half_width, s.peak};
  }

  // Profiles of the alive satellites, in ring order.
  std::vector<CoverageProfile> alive_profiles(const OrbitParams& orbit,
                                              double tau = 0.0) const {
    std::vector<CoverageProfile> out;
    out.reserve(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i)
      if (specs[i].alive) out.push_back(profile(i, orbit, tau));
    return out;
  }

  void validate(const OrbitParams& orbit) const {
    if (specs.size() != positions.size())
      throw std::invalid_argument("configuration: specs and positions must be parallel");
    std::vector<int> ids;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      if (!specs[i].alive) continue;
      specs[i].validate();
      ids.push_back(specs[i].id);
      if (circle_residual(positions[i], orbit) > 1e-10)
        throw std::invalid_argument("satellite " + std::to_string(specs[i].id) +
                                    ": position is off the orbit circle");
      if (positions[i].norm() > orbit.max_displacement + 1e-12)
        throw std::invalid_argument("satellite " + std::to_string(specs[i].id) +
                                    ": displacement exceeds the feasible bound");
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
      throw std::invalid_argument("configuration: duplicate satellite id");
  }

 private:
  std::size_t step_alive(std::size_t i, std::size_t stride) const {
    const std::size_t n = specs.size();
    if (n == 0) throw std::out_of_range("configuration is empty");
    std::size_t j = i;
    for (std::size_t hops = 0; hops < n; ++hops) {
      j = (j + stride) % n;
      if (j == i) break;
      if (specs[j].alive) return j;
    }
    throw std::out_of_range("satellite " + std::to_string(specs[i].id) +
                            " has no alive ring neighbor");
  }
};

// Leading and trailing half-footprints (C+, C-) of satellite i at time tau.
inline std::pair<ArcInterval, ArcInterval> coverage_region(const SatelliteSpec& spec,
                                                           const Vec2& p, double tau,
                                                           const OrbitParams& orbit) {
  const double phi =
      spec.initial_angle + deviation_angle(p, orbit) + orbit.mean_motion * tau;
  CoverageProfile prof{phi, spec.half_width, spec.peak};
  return {prof.leading(), prof.trailing()};
}

inline double local_intensity(const SatelliteSpec& spec, const Vec2& p, double theta,
                              double tau, const OrbitParams& orbit) {
  const double phi =
      spec.initial_angle + deviation_angle(p, orbit) + orbit.mean_motion * tau;
  return CoverageProfile{phi, spec.half_width, spec.peak}.intensity(theta);
}

inline double global_intensity(const Configuration& config, double theta, double tau,
                               const OrbitParams& orbit) {
  double acc = 0.0;
  for (std::size_t i = 0; i < config.specs.size(); ++i)
    if (config.specs[i].alive)
      acc += local_intensity(config.specs[i], config.positions[i], theta, tau, orbit);
  return acc;
}

/**
 * @brief Pairs of alive satellites that overlap in coverage without being
 * ring-adjacent.
 *
 * The cost model assumes footprints only reach their immediate neighbors;
 * this diagnostic reports violations (by id) so callers can warn about them.
 */
inline std::vector<std::pair<int, int>> nonadjacent_overlaps(const Configuration& config,
                                                             const OrbitParams& orbit) {
  std::vector<std::size_t> ring;
  for (std::size_t i = 0; i < config.specs.size(); ++i)
    if (config.specs[i].alive) ring.push_back(i);
  std::vector<std::pair<int, int>> bad;
  const std::size_t n = ring.size();
  if (n < 3) return bad;
  std::vector<double> centers(n), halves(n);
  for (std::size_t a = 0; a < n; ++a) {
    centers[a] = config.epoch_angle(ring[a], orbit);
    halves[a] = config.specs[ring[a]].half_width;
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const bool adjacent = (b == a + 1) || (a == 0 && b == n - 1);
      if (adjacent) continue;
      const double gap = std::abs(wrap_pi(centers[b] - centers[a]));
      if (gap < halves[a] + halves[b])
        bad.emplace_back(config.specs[ring[a]].id, config.specs[ring[b]].id);
    }
  }
  return bad;
}

}  // namespace covsim
