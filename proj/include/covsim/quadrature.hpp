#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "covsim/geometry.hpp"

namespace covsim {

// 8-point Gauss-Legendre rule on [-1, 1].
inline constexpr double gl8_node[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
inline constexpr double gl8_weight[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

template <class F>
double gl8_integrate(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int g = 0; g < 8; ++g) acc += gl8_weight[g] * f(mid + half * gl8_node[g]);
  return acc * half;
}

/**
 * @brief Settings for the coverage-cost quadrature.
 *
 * Angular integrals are decomposed at every intensity breakpoint and each
 * smooth piece is handled by the 8-point Gauss-Legendre rule; pieces longer
 * than `max_piece_len` are subdivided so the demand density is also resolved.
 * The orbit-period average uses `tau_samples` uniform time samples.
 */
struct QuadratureParams {
  int tau_samples = 64;
  double max_piece_len = two_pi / 128.0;

  void validate() const {
    if (tau_samples < 1) throw std::invalid_argument("quadrature: tau_samples must be >= 1");
    if (!(max_piece_len > 0.0))
      throw std::invalid_argument("quadrature: max_piece_len must be > 0");
  }
};

// Append [a, b] split into ceil((b-a)/max_len) equal subpieces.
inline void append_refined(std::vector<std::pair<double, double>>& pieces, double a,
                           double b, double max_len) {
  const double len = b - a;
  if (!(len > 0.0)) return;
  const int sub = static_cast<int>(std::ceil(len / max_len));
  for (int s = 0; s < sub; ++s)
    pieces.emplace_back(a + len * s / sub, a + len * (s + 1) / sub);
}

}  // namespace covsim
