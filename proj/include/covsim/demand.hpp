#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "covsim/geometry.hpp"
#include "covsim/quadrature.hpp"

namespace covsim {

/**
 * @brief One Gaussian bump of ground demand on the circle.
 *
 * Angles in radians; the mean may be given outside [0, 2*pi) and is wrapped.
 * `weight` is the mass the bump contributes before any model-level rescale.
 */
struct DemandComponent {
  double mean = 0.0;
  double std_dev = 1.0;
  double weight = 1.0;
};

/**
 * @brief Angular demand density on [0, 2*pi), either uniform or a wrapped
 * Gaussian mixture.
 *
 * Wrapping keeps three periodic images on each side of every component, which
 * covers std_dev up to roughly 2 rad at double precision. Evaluation is
 * deterministic: images beyond eight standard deviations contribute exactly
 * zero rather than a rounding-dependent denormal.
 */
class DemandModel {
 public:
  // Constant density `level` everywhere (level >= 0).
  static DemandModel uniform(double level) {
    if (!(level >= 0.0)) throw std::invalid_argument("demand: uniform level must be >= 0");
    DemandModel m;
    m.uniform_level_ = level;
    return m;
  }

  // Wrapped Gaussian mixture. An empty component list degenerates to the
  // uniform density with unit total mass.
  static DemandModel mixture(std::vector<DemandComponent> components) {
    DemandModel m;
    if (components.empty()) {
      m.uniform_level_ = 1.0 / two_pi;
      return m;
    }
    for (auto& c : components) {
      if (!(c.std_dev > 0.0)) throw std::invalid_argument("demand: std_dev must be > 0");
      if (!(c.weight > 0.0)) throw std::invalid_argument("demand: weight must be > 0");
      c.mean = wrap_two_pi(c.mean);
    }
    m.components_ = std::move(components);
    return m;
  }

  // Density at `theta` (any real angle).
  double operator()(double theta) const {
    const double t = wrap_two_pi(theta);
    if (components_.empty()) return scale_ * uniform_level_;
    double acc = 0.0;
    for (const auto& c : components_) {
      const double inv_sigma = 1.0 / c.std_dev;
      const double coef = c.weight * inv_sigma * inv_sqrt_two_pi;
      for (int j = -3; j <= 3; ++j) {
        const double z = (t - c.mean - two_pi * j) * inv_sigma;
        if (std::abs(z) > 8.0) continue;
        acc += coef * std::exp(-0.5 * z * z);
      }
    }
    return scale_ * acc;
  }

  // Integral of the density over one full circle.
  double total() const {
    if (components_.empty()) return scale_ * uniform_level_ * two_pi;
    // Composite 8-point Gauss-Legendre; the integrand is smooth, so this is
    // exact to rounding at this resolution.
    constexpr int pieces = 512;
    const double h = two_pi / pieces;
    double acc = 0.0;
    for (int p = 0; p < pieces; ++p)
      acc += gl8_integrate([this](double t) { return (*this)(t); }, p * h, (p + 1) * h);
    return acc;
  }

  // Rescale the density so that total() becomes `target`.
  void rescale_to(double target) {
    if (!(target >= 0.0)) throw std::invalid_argument("demand: rescale target must be >= 0");
    const double cur = total();
    if (!(cur > 0.0)) throw std::domain_error("demand: cannot rescale a zero density");
    scale_ *= target / cur;
  }

  double scale() const { return scale_; }
  bool is_uniform() const { return components_.empty(); }
  const std::vector<DemandComponent>& components() const { return components_; }

 private:
  DemandModel() = default;

  static constexpr double inv_sqrt_two_pi = 0.3989422804014327;

  std::vector<DemandComponent> components_;
  double uniform_level_ = 0.0;
  double scale_ = 1.0;
};

}  // namespace covsim
