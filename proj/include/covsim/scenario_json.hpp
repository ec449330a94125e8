#pragma once

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "covsim/scenario.hpp"

namespace covsim {

// Scenario files keep angles in degrees; everything internal is radians.

namespace detail_json {

using nlohmann::json;

inline double to_radians(double degrees) { return degrees * pi / 180.0; }

inline void expect_object(const json& node, const std::string& path) {
  if (!node.is_object())
    throw scenario_error(path + ": expected an object");
}

inline void expect_keys(const json& obj, std::initializer_list<const char*> allowed,
                        const std::string& path) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw scenario_error(path + ": unknown key \"" + item.key() + "\"");
  }
}

inline const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline double number(const json& obj, const char* key, const std::string& path) {
  const json* node = find(obj, key);
  if (!node) throw scenario_error(path + ": missing key \"" + key + "\"");
  if (!node->is_number())
    throw scenario_error(path + "." + key + ": expected a number");
  return node->get<double>();
}

inline double number_or(const json& obj, const char* key, double fallback,
                        const std::string& path) {
  return find(obj, key) ? number(obj, key, path) : fallback;
}

inline int integer(const json& obj, const char* key, const std::string& path) {
  const json* node = find(obj, key);
  if (!node) throw scenario_error(path + ": missing key \"" + key + "\"");
  if (!node->is_number_integer())
    throw scenario_error(path + "." + key + ": expected an integer");
  return node->get<int>();
}

inline int integer_or(const json& obj, const char* key, int fallback,
                      const std::string& path) {
  return find(obj, key) ? integer(obj, key, path) : fallback;
}

inline std::vector<int> id_list(const json& obj, const char* key,
                                const std::string& path) {
  const json* node = find(obj, key);
  if (!node) throw scenario_error(path + ": missing key \"" + key + "\"");
  if (!node->is_array())
    throw scenario_error(path + "." + key + ": expected an array of ids");
  std::vector<int> out;
  for (const auto& v : *node) {
    if (!v.is_number_integer())
      throw scenario_error(path + "." + key + ": expected integer ids");
    out.push_back(v.get<int>());
  }
  return out;
}

inline EventKind parse_kind(const std::string& text, const std::string& path) {
  for (EventKind k : {EventKind::cyber, EventKind::recover, EventKind::loss,
                      EventKind::replenish, EventKind::anchor, EventKind::unanchor})
    if (text == to_string(k)) return k;
  throw scenario_error(path + ".kind: unknown event kind \"" + text + "\"");
}

inline Event parse_event(const json& node, const std::string& path) {
  expect_object(node, path);
  expect_keys(node, {"time_tu", "kind", "ids", "changes", "additions"}, path);
  Event event;
  event.time = number(node, "time_tu", path);
  const json* kind = find(node, "kind");
  if (!kind || !kind->is_string())
    throw scenario_error(path + ".kind: expected a string");
  event.kind = parse_kind(kind->get<std::string>(), path);

  switch (event.kind) {
    case EventKind::cyber:
    case EventKind::recover: {
      const json* changes = find(node, "changes");
      if (!changes || !changes->is_array())
        throw scenario_error(path + ": " + to_string(event.kind) +
                             " event needs a \"changes\" array");
      int idx = 0;
      for (const auto& c : *changes) {
        const std::string cpath = path + ".changes[" + std::to_string(idx++) + "]";
        expect_object(c, cpath);
        expect_keys(c, {"id", "fov_deg", "peak_intensity"}, cpath);
        CoverageChange change;
        change.id = integer(c, "id", cpath);
        change.fov = to_radians(number(c, "fov_deg", cpath));
        change.peak = number(c, "peak_intensity", cpath);
        event.changes.push_back(change);
      }
      break;
    }
    case EventKind::replenish: {
      const json* additions = find(node, "additions");
      if (!additions || !additions->is_array())
        throw scenario_error(path + ": replenish event needs an \"additions\" array");
      int idx = 0;
      for (const auto& a : *additions) {
        const std::string apath = path + ".additions[" + std::to_string(idx++) + "]";
        expect_object(a, apath);
        expect_keys(a, {"id", "next_id", "prev_id", "fov_deg", "peak_intensity",
                        "initial_angle_deg"},
                    apath);
        Replenishment add;
        add.id = integer(a, "id", apath);
        add.next_id = integer(a, "next_id", apath);
        add.prev_id = integer(a, "prev_id", apath);
        add.fov = to_radians(number(a, "fov_deg", apath));
        add.peak = number(a, "peak_intensity", apath);
        if (find(a, "initial_angle_deg"))
          add.initial_angle = to_radians(number(a, "initial_angle_deg", apath));
        event.additions.push_back(add);
      }
      break;
    }
    case EventKind::loss:
    case EventKind::anchor:
    case EventKind::unanchor:
      event.ids = id_list(node, "ids", path);
      break;
  }
  return event;
}

}  // namespace detail_json

/// Parse scenario JSON text into a script; throws scenario_error on any
/// syntax, type, or schema problem, naming the offending field.
inline ScenarioScript parse_scenario(const std::string& text,
                                     const std::string& fallback_name = "") {
  using detail_json::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw scenario_error(std::string("scenario parse error: ") + e.what());
  }
  detail_json::expect_object(root, "scenario");
  detail_json::expect_keys(root,
                           {"name", "constellation", "demand", "planner", "controller",
                            "baseline", "events"},
                           "scenario");

  ScenarioScript script;
  script.name = fallback_name;
  if (const json* name = detail_json::find(root, "name")) {
    if (!name->is_string()) throw scenario_error("scenario.name: expected a string");
    script.name = name->get<std::string>();
  }

  const json* constellation = detail_json::find(root, "constellation");
  if (!constellation)
    throw scenario_error("scenario: missing key \"constellation\"");
  {
    const std::string path = "constellation";
    detail_json::expect_object(*constellation, path);
    detail_json::expect_keys(*constellation,
                             {"count", "altitude_du", "fov_deg", "peak_intensity",
                              "max_displacement_du", "initial_angles_deg",
                              "anchored_ids"},
                             path);
    script.count = detail_json::integer(*constellation, "count", path);
    script.altitude = detail_json::number_or(*constellation, "altitude_du", 0.8, path);
    script.fov =
        detail_json::to_radians(detail_json::number(*constellation, "fov_deg", path));
    script.peak = detail_json::number_or(*constellation, "peak_intensity", 10.0, path);
    script.max_displacement =
        detail_json::number_or(*constellation, "max_displacement_du", 0.9, path);
    if (const json* angles = detail_json::find(*constellation, "initial_angles_deg")) {
      if (!angles->is_array())
        throw scenario_error(path + ".initial_angles_deg: expected an array");
      for (const auto& v : *angles) {
        if (!v.is_number())
          throw scenario_error(path + ".initial_angles_deg: expected numbers");
        script.initial_angles.push_back(detail_json::to_radians(v.get<double>()));
      }
    }
    if (detail_json::find(*constellation, "anchored_ids"))
      script.anchored_ids = detail_json::id_list(*constellation, "anchored_ids", path);
  }

  if (const json* demand = detail_json::find(root, "demand")) {
    const std::string path = "demand";
    detail_json::expect_object(*demand, path);
    detail_json::expect_keys(*demand, {"components", "total", "random_count"}, path);
    if (const json* comps = detail_json::find(*demand, "components")) {
      if (!comps->is_array())
        throw scenario_error(path + ".components: expected an array");
      int idx = 0;
      for (const auto& c : *comps) {
        const std::string cpath = path + ".components[" + std::to_string(idx++) + "]";
        detail_json::expect_object(c, cpath);
        detail_json::expect_keys(c, {"mean_deg", "std_dev_deg", "weight"}, cpath);
        DemandComponent comp;
        comp.mean = detail_json::to_radians(detail_json::number(c, "mean_deg", cpath));
        comp.std_dev =
            detail_json::to_radians(detail_json::number(c, "std_dev_deg", cpath));
        comp.weight = detail_json::number_or(c, "weight", 1.0, cpath);
        script.demand.components.push_back(comp);
      }
    }
    if (const json* total = detail_json::find(*demand, "total")) {
      if (total->is_string()) {
        if (total->get<std::string>() != "match_initial_coverage")
          throw scenario_error(path + ".total: expected a number or "
                               "\"match_initial_coverage\"");
        script.demand.total = -1.0;
      } else if (total->is_number()) {
        script.demand.total = total->get<double>();
      } else {
        throw scenario_error(path + ".total: expected a number or "
                             "\"match_initial_coverage\"");
      }
    }
    script.demand.random_count =
        detail_json::integer_or(*demand, "random_count", 0, path);
  }

  if (const json* planner = detail_json::find(root, "planner")) {
    const std::string path = "planner";
    detail_json::expect_object(*planner, path);
    detail_json::expect_keys(
        *planner, {"base_step", "exit_tolerance", "max_stall", "max_rounds"}, path);
    script.planner.base_step =
        detail_json::number_or(*planner, "base_step", script.planner.base_step, path);
    script.planner.exit_tolerance = detail_json::number_or(
        *planner, "exit_tolerance", script.planner.exit_tolerance, path);
    script.planner.max_stall =
        detail_json::integer_or(*planner, "max_stall", script.planner.max_stall, path);
    script.planner.max_rounds = detail_json::integer_or(*planner, "max_rounds",
                                                        script.planner.max_rounds, path);
  }

  if (const json* controller = detail_json::find(root, "controller")) {
    const std::string path = "controller";
    detail_json::expect_object(*controller, path);
    detail_json::expect_keys(*controller,
                             {"dt", "horizon", "input_bound", "arrive_eps",
                              "waypoint_count", "position_weight", "velocity_weight",
                              "input_weight"},
                             path);
    ControlParams& c = script.control;
    c.dt = detail_json::number_or(*controller, "dt", c.dt, path);
    c.horizon = detail_json::integer_or(*controller, "horizon", c.horizon, path);
    c.input_bound = detail_json::number_or(*controller, "input_bound", c.input_bound, path);
    c.arrive_eps = detail_json::number_or(*controller, "arrive_eps", c.arrive_eps, path);
    c.waypoint_count =
        detail_json::integer_or(*controller, "waypoint_count", c.waypoint_count, path);
    const double wp = detail_json::number_or(*controller, "position_weight", 10.0, path);
    const double wv = detail_json::number_or(*controller, "velocity_weight", 1.0, path);
    const double wu = detail_json::number_or(*controller, "input_weight", 1.0, path);
    c.state_weight = Mat4::Identity();
    c.state_weight(0, 0) = c.state_weight(1, 1) = wp;
    c.state_weight(2, 2) = c.state_weight(3, 3) = wv;
    c.input_weight = wu * Eigen::Matrix2d::Identity();
  }

  if (const json* baseline = detail_json::find(root, "baseline")) {
    if (!baseline->is_string())
      throw scenario_error("scenario.baseline: expected a string");
    const std::string text_value = baseline->get<std::string>();
    if (text_value == "dpgd_mwmpc")
      script.baseline = Baseline::dpgd_mwmpc;
    else if (text_value == "equal_spacing")
      script.baseline = Baseline::equal_spacing;
    else
      throw scenario_error("scenario.baseline: expected \"dpgd_mwmpc\" or "
                           "\"equal_spacing\"");
  }

  if (const json* events = detail_json::find(root, "events")) {
    if (!events->is_array())
      throw scenario_error("scenario.events: expected an array");
    int idx = 0;
    for (const auto& node : *events)
      script.events.push_back(
          detail_json::parse_event(node, "events[" + std::to_string(idx++) + "]"));
  }
  return script;
}

/// Read and parse a scenario file.
inline ScenarioScript load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw scenario_error("cannot open scenario file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string stem = path;
  if (const auto slash = stem.find_last_of("/\\"); slash != std::string::npos)
    stem = stem.substr(slash + 1);
  if (const auto dot = stem.find_last_of('.'); dot != std::string::npos)
    stem = stem.substr(0, dot);
  return parse_scenario(buffer.str(), stem);
}

}  // namespace covsim
