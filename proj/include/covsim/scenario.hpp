#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "covsim/constellation.hpp"
#include "covsim/control.hpp"
#include "covsim/coverage.hpp"
#include "covsim/demand.hpp"
#include "covsim/game.hpp"
#include "covsim/geometry.hpp"
#include "covsim/orbit.hpp"

namespace covsim {

/// Problem with a scenario script or an event applied against the wrong
/// configuration state; message carries the offending field or id.
class scenario_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EventKind { cyber, recover, loss, replenish, anchor, unanchor };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::cyber: return "cyber";
    case EventKind::recover: return "recover";
    case EventKind::loss: return "loss";
    case EventKind::replenish: return "replenish";
    case EventKind::anchor: return "anchor";
    case EventKind::unanchor: return "unanchor";
  }
  return "?";
}

// New sensing parameters for one satellite; used by cyber and recover events.
struct CoverageChange {
  int id = 0;
  double fov = 0.0;   // sensor cone opening [rad]
  double peak = 0.0;  // new peak intensity
};

/**
 * @brief Spare satellite insertion between two currently adjacent ring slots.
 *
 * `next_id` leads the new satellite, `prev_id` trails it. Without an explicit
 * initial angle the spare spawns at the midpoint of its neighbors' current
 * angles.
 */
struct Replenishment {
  int id = 0;
  int next_id = 0;
  int prev_id = 0;
  double fov = 0.0;
  double peak = 0.0;
  std::optional<double> initial_angle;  // chief angle [rad]
};

struct Event {
  double time = 0.0;  // [TU]; values <= 0 modify the initial configuration
  EventKind kind = EventKind::cyber;
  std::vector<int> ids;                    // loss / anchor / unanchor
  std::vector<CoverageChange> changes;     // cyber / recover
  std::vector<Replenishment> additions;    // replenish
};

enum class Baseline { dpgd_mwmpc, equal_spacing };

/**
 * @brief Ground demand description. Explicit `total` rescales the mixture to
 * that mass; a negative total means "match the constellation's aggregate
 * coverage mass at build time". `random_count` > 0 draws that many components
 * from the run seed instead of using the explicit list.
 */
struct DemandSpec {
  std::vector<DemandComponent> components;  // angles in radians
  double total = -1.0;
  int random_count = 0;
};

/// Full simulation script; maps one-to-one onto a scenario file.
struct ScenarioScript {
  std::string name;
  int count = 0;                       // satellites at start, ids 1..count
  double altitude = 0.8;               // [DU]
  double fov = 0.0;                    // shared sensor cone opening [rad]
  double peak = 10.0;
  double max_displacement = 0.9;       // p_max [DU]
  std::vector<double> initial_angles;  // [rad]; empty means uniform spacing
  std::vector<int> anchored_ids;
  DemandSpec demand;
  PlannerParams planner;
  ControlParams control;
  Baseline baseline = Baseline::dpgd_mwmpc;
  std::vector<Event> events;
};

inline OrbitParams scenario_orbit(const ScenarioScript& script) {
  return OrbitParams::from_altitude(script.altitude, script.max_displacement);
}

/// Satellites 1..count on the ring, all alive, zero relative displacement.
inline Configuration build_initial_configuration(const ScenarioScript& script,
                                                 const OrbitParams& orbit) {
  if (script.count < 3) throw scenario_error("scenario needs at least 3 satellites");
  if (!script.initial_angles.empty() &&
      script.initial_angles.size() != std::size_t(script.count))
    throw scenario_error("initial_angles must list one angle per satellite");

  const double alpha = footprint_half_angle(script.fov, orbit);
  Configuration config;
  config.specs.resize(script.count);
  config.positions.assign(script.count, Vec2::Zero());
  for (int i = 0; i < script.count; ++i) {
    auto& s = config.specs[i];
    s.id = i + 1;
    s.half_width = alpha;
    s.peak = script.peak;
    s.initial_angle = script.initial_angles.empty() ? two_pi * i / script.count
                                                    : script.initial_angles[i];
  }
  for (int id : script.anchored_ids) {
    if (id < 1 || id > script.count)
      throw scenario_error("anchored id " + std::to_string(id) + " does not exist");
    config.specs[config.index_of(id)].anchored = true;
  }
  config.validate(orbit);
  return config;
}

/**
 * @brief Demand model for a script. The rescale target defaults to the alive
 * constellation's total coverage mass (sum of half_width*peak triangles) so
 * supply and demand start balanced.
 */
inline DemandModel scenario_demand(const ScenarioScript& script,
                                   const Configuration& initial, unsigned seed = 12345) {
  std::vector<DemandComponent> components = script.demand.components;
  if (script.demand.random_count > 0) {
    if (!components.empty())
      throw scenario_error("demand: give either components or random_count, not both");
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> mean(0.0, two_pi);
    std::uniform_real_distribution<double> width(0.15, 0.6);
    std::uniform_real_distribution<double> mass(0.5, 3.0);
    for (int k = 0; k < script.demand.random_count; ++k)
      components.push_back({mean(rng), width(rng), mass(rng)});
  }

  double target = script.demand.total;
  if (target < 0.0) {
    target = 0.0;
    for (const auto& s : initial.specs)
      if (s.alive) target += s.half_width * s.peak;
  }
  DemandModel model = DemandModel::mixture(std::move(components));
  model.rescale_to(target);
  return model;
}

namespace detail {

inline std::size_t alive_index(const Configuration& config, int id, const char* what) {
  std::size_t i;
  try {
    i = config.index_of(id);
  } catch (const std::out_of_range&) {
    throw scenario_error(std::string(what) + ": unknown satellite id " +
                         std::to_string(id));
  }
  if (!config.specs[i].alive)
    throw scenario_error(std::string(what) + ": satellite " + std::to_string(id) +
                         " is not alive");
  return i;
}

}  // namespace detail

/**
 * @brief Apply one scripted event, returning the altered configuration.
 *
 * Survivors keep their positions; adaptation happens later through
 * re-planning. Losses leave dead entries in the roster (the ring skips them),
 * replenishments insert a live entry between two currently adjacent
 * satellites.
 */
inline Configuration apply_event(Configuration config, const Event& event,
                                 const OrbitParams& orbit) {
  switch (event.kind) {
    case EventKind::cyber:
    case EventKind::recover: {
      const char* what = to_string(event.kind);
      for (const auto& change : event.changes) {
        const std::size_t i = detail::alive_index(config, change.id, what);
        config.specs[i].half_width = footprint_half_angle(change.fov, orbit);
        config.specs[i].peak = change.peak;
      }
      break;
    }
    case EventKind::loss: {
      for (int id : event.ids) {
        const std::size_t i = detail::alive_index(config, id, "loss");
        config.specs[i].alive = false;
      }
      if (config.alive_count() < 3)
        throw scenario_error("loss: fewer than 3 satellites would remain");
      break;
    }
    case EventKind::replenish: {
      for (const auto& add : event.additions) {
        bool exists = true;
        try {
          config.index_of(add.id);
        } catch (const std::out_of_range&) {
          exists = false;
        }
        if (exists)
          throw scenario_error("replenish: satellite id " + std::to_string(add.id) +
                               " already exists");
        const std::size_t prev = detail::alive_index(config, add.prev_id, "replenish");
        const std::size_t next = detail::alive_index(config, add.next_id, "replenish");
        if (config.next_alive(prev) != next)
          throw scenario_error("replenish: satellites " + std::to_string(add.next_id) +
                               " and " + std::to_string(add.prev_id) +
                               " are not adjacent");
        SatelliteSpec spec;
        spec.id = add.id;
        spec.half_width = footprint_half_angle(add.fov, orbit);
        spec.peak = add.peak;
        if (add.initial_angle) {
          spec.initial_angle = *add.initial_angle;
        } else {
          const double behind = config.epoch_angle(prev, orbit);
          const double gap = wrap_two_pi(config.epoch_angle(next, orbit) - behind);
          spec.initial_angle = behind + 0.5 * gap;
        }
        config.specs.insert(config.specs.begin() + next, spec);
        config.positions.insert(config.positions.begin() + next, Vec2::Zero());
      }
      break;
    }
    case EventKind::anchor:
    case EventKind::unanchor: {
      const bool flag = event.kind == EventKind::anchor;
      for (int id : event.ids) {
        const std::size_t i = detail::alive_index(config, id, to_string(event.kind));
        config.specs[i].anchored = flag;
      }
      break;
    }
  }
  config.validate(orbit);
  return config;
}

struct EqualSpacingTargets {
  Configuration target;
  std::vector<int> clamped_ids;  // satellites whose target hit the arc bound
};

/**
 * @brief Targets placing the alive satellites at uniform angular spacing.
 *
 * The global rotation offset conserves the mean of the current unwrapped
 * configuration angles, which is the conserved quantity of the neighbor
 * averaging iteration x_i <- (x_{i-1} + x_{i+1})/2 on the ring; the targets
 * are that iteration's limit. Targets outside a satellite's feasible arc are
 * clamped to the near end and reported. Anchored satellites keep their
 * current position (their angle still enters the mean). Demand plays no role.
 */
inline EqualSpacingTargets equal_spacing_targets(const Configuration& config,
                                                 const OrbitParams& orbit) {
  EqualSpacingTargets out;
  out.target = config;

  std::vector<std::size_t> ring;
  for (std::size_t i = 0; i < config.size(); ++i)
    if (config.specs[i].alive) ring.push_back(i);
  const std::size_t n = ring.size();
  if (n < 2) return out;

  std::vector<double> unwrapped(n);
  unwrapped[0] = config.epoch_angle(ring[0], orbit);
  for (std::size_t j = 1; j < n; ++j) {
    const double gap = wrap_two_pi(config.epoch_angle(ring[j], orbit) -
                                   config.epoch_angle(ring[j - 1], orbit));
    unwrapped[j] = unwrapped[j - 1] + gap;
  }

  double mean = 0.0;
  for (double x : unwrapped) mean += x;
  mean /= double(n);
  const double spacing = two_pi / double(n);
  const double offset = mean - spacing * double(n - 1) / 2.0;

  const double bound = max_deviation_angle(orbit);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t i = ring[j];
    if (config.specs[i].anchored) continue;
    const double want = wrap_pi(offset + spacing * double(j) -
                                config.specs[i].initial_angle);
    const double clamped = std::clamp(want, -bound, bound);
    if (clamped != want) out.clamped_ids.push_back(config.specs[i].id);
    out.target.positions[i] = circle_point(clamped, orbit);
  }
  return out;
}

/**
 * @brief Static script diagnostics; an empty list means the script is valid.
 *
 * Replays the event sequence against a symbolic roster so id and adjacency
 * problems surface before any simulation runs.
 */
inline std::vector<std::string> validate_script(const ScenarioScript& script) {
  std::vector<std::string> problems;
  auto complain = [&](const std::string& msg) { problems.push_back(msg); };

  OrbitParams orbit;
  bool have_orbit = true;
  try {
    orbit = scenario_orbit(script);
  } catch (const std::exception& e) {
    complain(std::string("constellation: ") + e.what());
    have_orbit = false;
  }

  if (script.count < 3) complain("constellation: count must be at least 3");
  if (!script.initial_angles.empty() &&
      script.initial_angles.size() != std::size_t(script.count))
    complain("constellation: initial_angles must list one angle per satellite");
  if (have_orbit) {
    try {
      footprint_half_angle(script.fov, orbit);
    } catch (const std::exception& e) {
      complain(std::string("constellation: fov: ") + e.what());
    }
  }
  if (!(script.peak > 0.0)) complain("constellation: peak intensity must be > 0");

  try {
    script.planner.validate();
  } catch (const std::exception& e) {
    complain(std::string("planner: ") + e.what());
  }
  try {
    script.control.validate();
  } catch (const std::exception& e) {
    complain(std::string("controller: ") + e.what());
  }

  if (script.demand.random_count < 0) complain("demand: random_count must be >= 0");
  if (script.demand.random_count > 0 && !script.demand.components.empty())
    complain("demand: give either components or random_count, not both");
  for (std::size_t c = 0; c < script.demand.components.size(); ++c) {
    const auto& comp = script.demand.components[c];
    if (!(comp.std_dev > 0.0))
      complain("demand: component " + std::to_string(c) + ": std_dev must be > 0");
    if (!(comp.weight > 0.0))
      complain("demand: component " + std::to_string(c) + ": weight must be > 0");
  }

  // Symbolic roster replay: ring order of ids, alive flags tracked by sign.
  std::vector<int> ring;
  for (int i = 1; i <= script.count; ++i) ring.push_back(i);
  std::vector<int> dead;
  auto is_dead = [&](int id) {
    return std::find(dead.begin(), dead.end(), id) != dead.end();
  };
  auto in_ring = [&](int id) {
    return std::find(ring.begin(), ring.end(), id) != ring.end();
  };
  auto alive_neighbor_after = [&](int id) {
    auto it = std::find(ring.begin(), ring.end(), id);
    for (std::size_t hops = 1; hops < ring.size(); ++hops) {
      it = std::next(it) == ring.end() ? ring.begin() : std::next(it);
      if (!is_dead(*it)) return *it;
    }
    return id;
  };

  for (int id : script.anchored_ids)
    if (id < 1 || id > script.count)
      complain("constellation: anchored id " + std::to_string(id) + " does not exist");

  for (std::size_t e = 0; e < script.events.size(); ++e) {
    const Event& ev = script.events[e];
    const std::string where = "event " + std::to_string(e) + " (" +
                              to_string(ev.kind) + ")";
    if (e > 0 && ev.time < script.events[e - 1].time)
      complain(where + ": time " + std::to_string(ev.time) +
               " precedes the earlier event at time " +
               std::to_string(script.events[e - 1].time));

    auto check_alive = [&](int id) {
      if (!in_ring(id)) {
        complain(where + ": unknown satellite id " + std::to_string(id));
        return false;
      }
      if (is_dead(id)) {
        complain(where + ": satellite " + std::to_string(id) + " is not alive");
        return false;
      }
      return true;
    };

    switch (ev.kind) {
      case EventKind::cyber:
      case EventKind::recover:
        if (ev.changes.empty()) complain(where + ": no coverage changes listed");
        for (const auto& change : ev.changes) {
          check_alive(change.id);
          if (have_orbit) {
            try {
              footprint_half_angle(change.fov, orbit);
            } catch (const std::exception& err) {
              complain(where + ": satellite " + std::to_string(change.id) +
                       ": fov: " + err.what());
            }
          }
          if (!(change.peak > 0.0))
            complain(where + ": satellite " + std::to_string(change.id) +
                     ": peak intensity must be > 0");
        }
        break;
      case EventKind::loss: {
        if (ev.ids.empty()) complain(where + ": no satellites listed");
        for (int id : ev.ids)
          if (check_alive(id)) dead.push_back(id);
        const std::size_t alive = ring.size() - dead.size();
        if (alive < 3)
          complain(where + ": fewer than 3 satellites would remain");
        break;
      }
      case EventKind::replenish:
        if (ev.additions.empty()) complain(where + ": no satellites listed");
        for (const auto& add : ev.additions) {
          if (in_ring(add.id)) {
            complain(where + ": replenish id " + std::to_string(add.id) +
                     " already exists");
            continue;
          }
          const bool prev_ok = check_alive(add.prev_id);
          const bool next_ok = check_alive(add.next_id);
          if (prev_ok && next_ok &&
              alive_neighbor_after(add.prev_id) != add.next_id)
            complain(where + ": satellites " + std::to_string(add.next_id) + " and " +
                     std::to_string(add.prev_id) + " are not adjacent");
          if (have_orbit) {
            try {
              footprint_half_angle(add.fov, orbit);
            } catch (const std::exception& err) {
              complain(where + ": satellite " + std::to_string(add.id) +
                       ": fov: " + err.what());
            }
          }
          if (!(add.peak > 0.0))
            complain(where + ": satellite " + std::to_string(add.id) +
                     ": peak intensity must be > 0");
          if (prev_ok && next_ok && !in_ring(add.id)) {
            auto it = std::find(ring.begin(), ring.end(), add.next_id);
            ring.insert(it, add.id);
          }
        }
        break;
      case EventKind::anchor:
      case EventKind::unanchor:
        if (ev.ids.empty()) complain(where + ": no satellites listed");
        for (int id : ev.ids) check_alive(id);
        break;
    }
  }
  return problems;
}

}  // namespace covsim
