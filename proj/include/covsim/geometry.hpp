#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace covsim {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Reduce an angle to [0, 2*pi).
inline double wrap_two_pi(double a) {
  double w = a - two_pi * std::floor(a / two_pi);
  if (w >= two_pi) w -= two_pi;  // guard against floor rounding at the seam
  if (w < 0.0) w = 0.0;
  return w;
}

// Reduce an angle to (-pi, pi].
inline double wrap_pi(double a) {
  double w = wrap_two_pi(a);
  return w > std::numbers::pi ? w - two_pi : w;
}

/**
 * @brief Directed arc on the unit circle.
 *
 * Stored as [lo, lo + len) with len in [0, 2*pi); membership is mod 2*pi.
 * The representation is direction-aware so arcs that straddle the 0/2*pi
 * seam need no special casing by callers.
 */
struct ArcInterval {
  double lo = 0.0;   // start angle [rad]
  double len = 0.0;  // arc length [rad], in [0, 2*pi)

  static ArcInterval from_bounds(double lo, double hi) {
    ArcInterval arc;
    arc.lo = wrap_two_pi(lo);
    arc.len = hi - lo;
    return arc;
  }

  double hi() const { return lo + len; }

  bool contains(double theta) const {
    double d = wrap_two_pi(theta - lo);
    return d < len;
  }
};

// Split an arc at the 0/2*pi seam into plain [a,b] segments with b <= 2*pi.
inline std::vector<std::pair<double, double>> arc_segments(const ArcInterval& arc) {
  std::vector<std::pair<double, double>> segs;
  if (arc.len <= 0.0) return segs;
  double lo = wrap_two_pi(arc.lo);
  double hi = lo + arc.len;
  if (hi <= two_pi) {
    segs.emplace_back(lo, hi);
  } else {
    segs.emplace_back(lo, two_pi);
    segs.emplace_back(0.0, hi - two_pi);
  }
  return segs;
}

// Union of arcs as disjoint seam-split segments, sorted by start angle.
inline std::vector<std::pair<double, double>> merge_arcs(const std::vector<ArcInterval>& arcs) {
  std::vector<std::pair<double, double>> segs;
  for (const auto& a : arcs)
    for (const auto& s : arc_segments(a)) segs.push_back(s);
  if (segs.empty()) return segs;
  std::sort(segs.begin(), segs.end());
  std::vector<std::pair<double, double>> merged;
  merged.push_back(segs.front());
  for (std::size_t i = 1; i < segs.size(); ++i) {
    if (segs[i].first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, segs[i].second);
    } else {
      merged.push_back(segs[i]);
    }
  }
  return merged;
}

}  // namespace covsim
