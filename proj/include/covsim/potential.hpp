#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "covsim/constellation.hpp"
#include "covsim/demand.hpp"
#include "covsim/quadrature.hpp"

namespace covsim {

namespace detail {

// Wrapped kink locations of the aggregate intensity: each profile's edges and
// center.
inline std::vector<double> intensity_breakpoints(const std::vector<CoverageProfile>& profiles) {
  std::vector<double> breaks;
  breaks.reserve(profiles.size() * 3);
  for (const auto& prof : profiles) {
    breaks.push_back(wrap_two_pi(prof.center - prof.half_width));
    breaks.push_back(wrap_two_pi(prof.center));
    breaks.push_back(wrap_two_pi(prof.center + prof.half_width));
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  return breaks;
}

// Partition of the full circle cut at `breaks`, each piece refined to at most
// `max_len`. Pieces may extend past 2*pi; evaluation is periodic.
inline std::vector<std::pair<double, double>> circle_pieces(const std::vector<double>& breaks,
                                                            double max_len) {
  std::vector<std::pair<double, double>> pieces;
  if (breaks.empty()) {
    append_refined(pieces, 0.0, two_pi, max_len);
    return pieces;
  }
  for (std::size_t j = 0; j + 1 < breaks.size(); ++j)
    append_refined(pieces, breaks[j], breaks[j + 1], max_len);
  append_refined(pieces, breaks.back(), breaks.front() + two_pi, max_len);
  return pieces;
}

// Pieces covering the given disjoint segments (each within [0, 2*pi]), cut at
// `breaks` and refined.
inline std::vector<std::pair<double, double>> segment_pieces(
    const std::vector<std::pair<double, double>>& segments,
    const std::vector<double>& breaks, double max_len) {
  std::vector<std::pair<double, double>> pieces;
  for (const auto& [a, b] : segments) {
    double lo = a;
    for (double br : breaks) {
      if (br <= a || br >= b) continue;
      append_refined(pieces, lo, br, max_len);
      lo = br;
    }
    append_refined(pieces, lo, b, max_len);
  }
  return pieces;
}

// Gauss-Legendre nodes and weights laid out flat over a piece list, plus the
// aggregate intensity sampled once at every node.
struct SampledDensity {
  std::vector<double> sigma;
  std::vector<double> weight;
  std::vector<double> rho;
};

inline SampledDensity sample_density(const std::vector<CoverageProfile>& profiles,
                                     const std::vector<std::pair<double, double>>& pieces) {
  SampledDensity s;
  s.sigma.reserve(pieces.size() * 8);
  s.weight.reserve(pieces.size() * 8);
  for (const auto& [a, b] : pieces) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int g = 0; g < 8; ++g) {
      s.sigma.push_back(mid + half * gl8_node[g]);
      s.weight.push_back(half * gl8_weight[g]);
    }
  }
  s.rho.reserve(s.sigma.size());
  for (double t : s.sigma) s.rho.push_back(aggregate_intensity(profiles, t));
  return s;
}

// Average over one orbit period of the squared gap between a fixed rotating
// density sample and the ground demand.
inline double averaged_gap_cost(const SampledDensity& s, const DemandModel& demand,
                                const OrbitParams& orbit, const QuadratureParams& quad,
                                double tau0) {
  const double dtau = orbit.period / quad.tau_samples;
  double acc = 0.0;
  for (int m = 0; m < quad.tau_samples; ++m) {
    const double shift = orbit.mean_motion * (tau0 + m * dtau);
    double inner = 0.0;
    for (std::size_t j = 0; j < s.sigma.size(); ++j) {
      const double d = s.rho[j] - demand(s.sigma[j] + shift);
      inner += s.weight[j] * d * d;
    }
    acc += inner;
  }
  return acc / (2.0 * quad.tau_samples);
}

}  // namespace detail

/**
 * @brief Exact integral of the aggregate (piecewise-linear) intensity over an
 * arc, by trapezoids between kinks.
 */
inline double linear_density_integral(const std::vector<CoverageProfile>& profiles,
                                      const ArcInterval& arc) {
  const auto breaks = detail::intensity_breakpoints(profiles);
  double acc = 0.0;
  for (const auto& [a, b] : arc_segments(arc)) {
    double lo = a;
    auto flush = [&](double hi) {
      if (hi > lo)
        acc += (hi - lo) * 0.5 *
               (aggregate_intensity(profiles, lo) + aggregate_intensity(profiles, hi));
      lo = hi;
    };
    for (double br : breaks)
      if (br > a && br < b) flush(br);
    flush(b);
  }
  return acc;
}

// Full-circle integral of the aggregate intensity.
inline double linear_density_integral(const std::vector<CoverageProfile>& profiles) {
  return linear_density_integral(profiles, ArcInterval{0.0, pi}) +
         linear_density_integral(profiles, ArcInterval{pi, pi});
}

/**
 * @brief Ring-wide coverage cost: the squared intensity-vs-demand gap
 * integrated over the circle and averaged over one orbit period.
 *
 * `tau0` shifts the averaging window; by periodicity the result does not
 * depend on it (tested to quadrature tolerance).
 */
inline double potential(const Configuration& config, const DemandModel& demand,
                        const OrbitParams& orbit, const QuadratureParams& quad = {},
                        double tau0 = 0.0) {
  quad.validate();
  const auto profiles = config.alive_profiles(orbit);
  const auto pieces =
      detail::circle_pieces(detail::intensity_breakpoints(profiles), quad.max_piece_len);
  const auto sampled = detail::sample_density(profiles, pieces);
  return detail::averaged_gap_cost(sampled, demand, orbit, quad, tau0);
}

/**
 * @brief Per-satellite coverage cost: the same gap cost restricted to the
 * region satellite i can influence, i.e. its own footprint plus the leading
 * half of its trailing neighbor and the trailing half of its leading neighbor.
 * Only the three local intensities enter.
 */
inline double satellite_cost(std::size_t i, const Configuration& config,
                             const DemandModel& demand, const OrbitParams& orbit,
                             const QuadratureParams& quad = {}, double tau0 = 0.0) {
  quad.validate();
  if (i >= config.size()) throw std::out_of_range("satellite_cost: index out of range");
  if (!config.specs[i].alive)
    throw std::invalid_argument("satellite_cost: satellite " +
                                std::to_string(config.specs[i].id) + " is not alive");

  std::vector<std::size_t> members = {i};
  if (config.alive_count() > 1) {
    const std::size_t prev = config.prev_alive(i);
    const std::size_t next = config.next_alive(i);
    members.push_back(prev);
    if (next != prev) members.push_back(next);
  }

  std::vector<CoverageProfile> local;
  local.reserve(members.size());
  for (std::size_t m : members) local.push_back(config.profile(m, orbit));

  std::vector<ArcInterval> arcs = {local[0].support()};
  if (members.size() >= 2) arcs.push_back(local[1].leading());  // trailing neighbor
  if (members.size() == 2) arcs.push_back(local[1].trailing()); // same sat both sides
  if (members.size() == 3) arcs.push_back(local[2].trailing()); // leading neighbor

  const auto pieces =
      detail::segment_pieces(merge_arcs(arcs), detail::intensity_breakpoints(local),
                             quad.max_piece_len);
  const auto sampled = detail::sample_density(local, pieces);
  return detail::averaged_gap_cost(sampled, demand, orbit, quad, tau0);
}

}  // namespace covsim
