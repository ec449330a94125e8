#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "covsim/potential.hpp"
#include "covsim/scenario.hpp"

namespace covsim {

/**
 * @brief One timeline row: either a planning round (frozen sim time,
 * planner_round >= 0) or a control step (planner_round == -1).
 *
 * `deviations` is aligned with the run's column id roster and holds the angle
 * each satellite has drifted from its spawn slot; NaN marks satellites that do
 * not exist or are dead at this step.
 */
struct MetricsRecord {
  int step = 0;
  double sim_time = 0.0;  // [TU]
  std::string phase;
  double potential_value = 0.0;
  double control_cost = 0.0;  // cumulative, R-weighted
  std::vector<double> deviations;  // [rad]
  int planner_round = -1;
};

struct PhaseSummary {
  std::string phase;
  double converged_potential = 0.0;  // at the last record of the phase
  double potential_before_events = std::numeric_limits<double>::quiet_NaN();
  double potential_after_events = std::numeric_limits<double>::quiet_NaN();
  int planner_rounds = 0;
  double control_cost = 0.0;  // accrued within the phase
  bool plan_converged = true;
};

// Optimality evidence for one converged plan.
struct PhaseCertificate {
  std::string phase;
  OptimalityReport report;
};

struct ScenarioRun {
  std::vector<int> column_ids;  // every id that ever exists, roster order then spawn order
  std::vector<MetricsRecord> timeline;
  std::vector<PhaseSummary> phases;
  std::vector<PhaseCertificate> certificates;
  Configuration final_config;
  bool aborted = false;
  std::string diagnostic;
};

inline double control_cost_total(const std::vector<MetricsRecord>& timeline) {
  return timeline.empty() ? 0.0 : timeline.back().control_cost;
}

namespace detail {

// Per-satellite maneuver progress between two planning barriers.
struct FlightState {
  std::size_t index = 0;  // into the configuration roster
  std::vector<Vec2> waypoints;
  std::size_t next_waypoint = 0;
  Vec4 q = Vec4::Zero();
  Eigen::VectorXd warm;
  int leg_steps = 0;
  bool flying = false;
};

}  // namespace detail

/**
 * @brief Run a scripted simulation to a metrics timeline.
 *
 * Phase cycle: fix each satellite's frame at its current slot, plan a target
 * configuration (game planner or equal-spacing baseline), fly everyone through
 * equally spaced waypoints in lockstep, and hold formation until the next
 * event. Satellites that detect a pending event at a waypoint arrival park
 * there; once all are parked the due events apply and planning restarts.
 *
 * Parking snaps the state to the commanded waypoint exactly (on-circle, zero
 * relative velocity) and holding a slot is free: a phase-shifted slot on the
 * same circular orbit is an equilibrium of the true dynamics, so the residual
 * drift of the per-satellite linear model is an artifact not worth fuel
 * accounting. Snapping also makes replans bit-reproducible.
 *
 * The returned timeline is deterministic: identical scripts and seeds yield
 * identical records. `seed` only randomizes the demand profile (when the
 * script asks for random components).
 */
inline ScenarioRun run_scenario(const ScenarioScript& script, unsigned seed = 12345) {
  {
    const auto problems = validate_script(script);
    if (!problems.empty()) {
      std::string msg = "invalid scenario";
      for (const auto& p : problems) msg += "\n  " + p;
      throw scenario_error(msg);
    }
  }

  const OrbitParams orbit = scenario_orbit(script);
  Configuration config = build_initial_configuration(script, orbit);

  // Events at time <= 0 reshape the initial configuration.
  std::size_t next_event = 0;
  while (next_event < script.events.size() &&
         script.events[next_event].time <= 0.0) {
    config = apply_event(config, script.events[next_event], orbit);
    ++next_event;
  }

  const DemandModel demand = scenario_demand(script, config, seed);
  const auto [a_cont, b_cont] = cw_continuous(orbit.mean_motion);
  const DiscreteSystem system = discretize(a_cont, b_cont, script.control.dt);
  const CondensedLqr solver(system, script.control);
  constexpr int leg_step_cap = 10000;

  ScenarioRun run;
  std::map<int, double> spawn_angle;  // id -> slot angle at first appearance
  for (const auto& s : config.specs) {
    run.column_ids.push_back(s.id);
    spawn_angle[s.id] = s.initial_angle;
  }
  for (std::size_t e = next_event; e < script.events.size(); ++e)
    for (const auto& add : script.events[e].additions) {
      run.column_ids.push_back(add.id);
      // spawn angle recorded when the insertion actually happens
    }

  double sim_time = 0.0;
  double cum_cost = 0.0;
  int step_index = 0;
  int attack_count = 0;
  int recovery_count = 0;
  std::string phase = "init";

  PhaseSummary current;
  current.phase = phase;
  double phase_cost_start = 0.0;

  auto deviations_now = [&](const Configuration& c) {
    std::vector<double> out(run.column_ids.size(),
                            std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!c.specs[i].alive) continue;
      const auto col = std::find(run.column_ids.begin(), run.column_ids.end(),
                                 c.specs[i].id);
      out[col - run.column_ids.begin()] =
          wrap_pi(c.epoch_angle(i, orbit) - spawn_angle.at(c.specs[i].id));
    }
    return out;
  };

  auto log_record = [&](const Configuration& c, double j, int planner_round) {
    MetricsRecord rec;
    rec.step = step_index++;
    rec.sim_time = sim_time;
    rec.phase = phase;
    rec.potential_value = j;
    rec.control_cost = cum_cost;
    rec.deviations = deviations_now(c);
    rec.planner_round = planner_round;
    run.timeline.push_back(rec);
  };

  auto potential_now = [&](const Configuration& c) {
    return potential(c, demand, orbit, script.planner.quad);
  };

  auto finish_phase = [&]() {
    current.converged_potential = run.timeline.back().potential_value;
    current.control_cost = cum_cost - phase_cost_start;
    run.phases.push_back(current);
  };

  auto abort_run = [&](const std::string& why) {
    run.aborted = true;
    run.diagnostic = why;
    finish_phase();
    run.final_config = config;
    return run;
  };

  while (true) {
    // Fix each satellite's maneuver frame at its current slot.
    for (std::size_t i = 0; i < config.size(); ++i) {
      if (!config.specs[i].alive) continue;
      config.specs[i].initial_angle = config.epoch_angle(i, orbit);
      config.positions[i] = Vec2::Zero();
    }

    // Plan; record the starting state as round 0.
    log_record(config, potential_now(config), 0);
    Configuration target = config;
    if (script.baseline == Baseline::dpgd_mwmpc) {
      const PlanResult plan_result =
          plan(config, orbit, script.planner,
               [&](int round, const Configuration& iterate) {
                 log_record(iterate, potential_now(iterate), round + 1);
               });
      current.planner_rounds = plan_result.rounds;
      current.plan_converged = plan_result.converged;
      if (!plan_result.converged)
        return abort_run("planner did not converge in phase " + phase + " after " +
                         std::to_string(plan_result.rounds) + " rounds");
      target = plan_result.target;
      run.certificates.push_back({phase, plan_result.report});
    } else {
      target = equal_spacing_targets(config, orbit).target;
      current.planner_rounds = 0;
      current.plan_converged = true;
    }

    // Distribute waypoints.
    std::vector<detail::FlightState> flights;
    for (std::size_t i = 0; i < config.size(); ++i) {
      if (!config.specs[i].alive || config.specs[i].anchored) continue;
      const Vec2 goal = target.positions[i];
      if ((goal - config.positions[i]).norm() < script.control.arrive_eps) continue;
      detail::FlightState f;
      f.index = i;
      f.waypoints = make_waypoints(config.positions[i], goal,
                                   script.control.waypoint_count, orbit)
                        .points;
      f.q.head<2>() = config.positions[i];
      f.flying = true;
      flights.push_back(f);
    }

    auto any_flying = [&]() {
      for (const auto& f : flights)
        if (f.flying) return true;
      return false;
    };
    auto events_due = [&](double t) {
      return next_event < script.events.size() &&
             script.events[next_event].time <= t;
    };
    auto wp_state = [](const Vec2& wp) {
      Vec4 t;
      t << wp(0), wp(1), 0.0, 0.0;
      return t;
    };

    // Lockstep flight until everyone has parked.
    while (any_flying()) {
      const double t_next = sim_time + script.control.dt;
      for (auto& f : flights) {
        if (!f.flying) continue;
        const ControlSolution sol =
            solver.solve(f.q, wp_state(f.waypoints[f.next_waypoint]),
                         f.warm.size() ? &f.warm : nullptr);
        const Vec2 u = sol.inputs.front();
        cum_cost += u.dot(script.control.input_weight * u) * script.control.dt;
        f.q = system.a_mat * f.q + system.b_mat * u;
        config.positions[f.index] = f.q.head<2>();

        f.warm.resize(2 * script.control.horizon);
        for (int k = 0; k + 1 < script.control.horizon; ++k)
          f.warm.segment<2>(2 * k) = sol.inputs[k + 1];
        f.warm.tail<2>().setZero();

        // Arrival: snap to the commanded slot; a pending event detected here
        // parks the satellite for the re-planning barrier.
        while (f.flying && (f.q - wp_state(f.waypoints[f.next_waypoint])).norm() <
                               script.control.arrive_eps) {
          f.q = wp_state(f.waypoints[f.next_waypoint]);
          config.positions[f.index] = f.waypoints[f.next_waypoint];
          f.warm.resize(0);
          f.leg_steps = 0;
          if (events_due(t_next) || f.next_waypoint + 1 == f.waypoints.size())
            f.flying = false;
          else
            ++f.next_waypoint;
        }
        if (f.flying && ++f.leg_steps > leg_step_cap) {
          sim_time = t_next;
          log_record(config, potential_now(config), -1);
          return abort_run("controller stalled on satellite " +
                           std::to_string(config.specs[f.index].id) + " in phase " +
                           phase);
        }
      }
      sim_time = t_next;
      log_record(config, potential_now(config), -1);
    }

    // Hold formation (nothing moves, no cost) until the next event is due.
    if (next_event < script.events.size()) {
      const double j_hold = potential_now(config);
      while (!events_due(sim_time)) {
        sim_time += script.control.dt;
        log_record(config, j_hold, -1);
      }
    }

    if (next_event >= script.events.size()) break;

    // Apply every due event as one group; its kinds name the next phase.
    const double j_before = potential_now(config);
    bool adversarial = false;
    while (events_due(sim_time)) {
      const Event& ev = script.events[next_event];
      adversarial = adversarial || ev.kind == EventKind::cyber ||
                    ev.kind == EventKind::loss;
      config = apply_event(config, ev, orbit);
      for (const auto& add : ev.additions)
        spawn_angle[add.id] = config.specs[config.index_of(add.id)].initial_angle;
      ++next_event;
    }

    finish_phase();
    phase = adversarial ? "attack-" + std::to_string(++attack_count)
                        : "recovery-" + std::to_string(++recovery_count);
    current = PhaseSummary{};
    current.phase = phase;
    current.potential_before_events = j_before;
    current.potential_after_events = potential_now(config);
    phase_cost_start = cum_cost;
  }

  finish_phase();
  run.final_config = config;
  return run;
}

}  // namespace covsim
