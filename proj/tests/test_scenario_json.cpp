#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include "covsim/scenario_json.hpp"

using namespace covsim;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

const char* full_document = R"json({
  "name": "exercise",
  "constellation": {
    "count": 25,
    "altitude_du": 0.8,
    "fov_deg": 90.0,
    "peak_intensity": 10.0,
    "max_displacement_du": 0.9,
    "anchored_ids": [6, 12]
  },
  "demand": {
    "components": [
      {"mean_deg": 45.0, "std_dev_deg": 20.0, "weight": 2.0},
      {"mean_deg": 200.0, "std_dev_deg": 15.0}
    ],
    "total": "match_initial_coverage"
  },
  "planner": {"base_step": 0.3, "exit_tolerance": 3e-3},
  "controller": {"dt": 0.6, "horizon": 30, "input_bound": 0.01,
                 "position_weight": 10.0, "velocity_weight": 1.0},
  "baseline": "dpgd_mwmpc",
  "events": [
    {"time_tu": 30.0, "kind": "loss", "ids": [1, 2]},
    {"time_tu": 60.0, "kind": "replenish",
     "additions": [{"id": 26, "next_id": 3, "prev_id": 25,
                    "fov_deg": 90.0, "peak_intensity": 10.0}]},
    {"time_tu": 90.0, "kind": "cyber",
     "changes": [{"id": 26, "fov_deg": 82.5, "peak_intensity": 8.0}]},
    {"time_tu": 120.0, "kind": "recover",
     "changes": [{"id": 26, "fov_deg": 90.0, "peak_intensity": 10.0}]},
    {"time_tu": 150.0, "kind": "anchor", "ids": [26]},
    {"time_tu": 180.0, "kind": "unanchor", "ids": [26]}
  ]
})json";

}  // namespace

TEST_CASE("full scenario document round trip") {
  const ScenarioScript script = parse_scenario(full_document);

  REQUIRE(script.name == "exercise");
  REQUIRE(script.count == 25);
  REQUIRE(script.altitude == 0.8);
  REQUIRE(script.fov == Approx(pi / 2.0).epsilon(1e-15));
  REQUIRE(script.peak == 10.0);
  REQUIRE(script.max_displacement == 0.9);
  REQUIRE(script.initial_angles.empty());
  REQUIRE(script.anchored_ids == std::vector<int>{6, 12});

  REQUIRE(script.demand.components.size() == 2);
  REQUIRE(script.demand.components[0].mean == Approx(pi / 4.0).epsilon(1e-15));
  REQUIRE(script.demand.components[0].std_dev ==
          Approx(20.0 * pi / 180.0).epsilon(1e-15));
  REQUIRE(script.demand.components[0].weight == 2.0);
  REQUIRE(script.demand.components[1].weight == 1.0);  // default
  REQUIRE(script.demand.total == -1.0);                // match_initial_coverage
  REQUIRE(script.demand.random_count == 0);

  REQUIRE(script.planner.base_step == 0.3);
  REQUIRE(script.planner.exit_tolerance == 3e-3);
  REQUIRE(script.planner.max_stall == 5);     // default kept
  REQUIRE(script.planner.max_rounds == 5000); // default kept

  REQUIRE(script.control.dt == 0.6);
  REQUIRE(script.control.horizon == 30);
  REQUIRE(script.control.input_bound == 0.01);
  REQUIRE(script.control.state_weight(0, 0) == 10.0);
  REQUIRE(script.control.state_weight(3, 3) == 1.0);
  REQUIRE(script.control.input_weight(0, 0) == 1.0);

  REQUIRE(script.baseline == Baseline::dpgd_mwmpc);

  REQUIRE(script.events.size() == 6);
  REQUIRE(script.events[0].kind == EventKind::loss);
  REQUIRE(script.events[0].time == 30.0);
  REQUIRE(script.events[0].ids == std::vector<int>{1, 2});
  REQUIRE(script.events[1].kind == EventKind::replenish);
  REQUIRE(script.events[1].additions.size() == 1);
  REQUIRE(script.events[1].additions[0].id == 26);
  REQUIRE(script.events[1].additions[0].next_id == 3);
  REQUIRE(script.events[1].additions[0].prev_id == 25);
  REQUIRE_FALSE(script.events[1].additions[0].initial_angle.has_value());
  REQUIRE(script.events[2].kind == EventKind::cyber);
  REQUIRE(script.events[2].changes.size() == 1);
  REQUIRE(script.events[2].changes[0].fov ==
          Approx(82.5 * pi / 180.0).epsilon(1e-15));
  REQUIRE(script.events[3].kind == EventKind::recover);
  REQUIRE(script.events[4].kind == EventKind::anchor);
  REQUIRE(script.events[5].kind == EventKind::unanchor);

  SECTION("the parsed script passes static validation") {
    const auto problems = validate_script(script);
    CAPTURE(problems);
    REQUIRE(problems.empty());
  }
}

TEST_CASE("scenario defaults") {
  const ScenarioScript script = parse_scenario(
      R"({"constellation": {"count": 5, "fov_deg": 60.0}})", "fallback");
  REQUIRE(script.name == "fallback");
  REQUIRE(script.count == 5);
  REQUIRE(script.altitude == 0.8);
  REQUIRE(script.fov == Approx(pi / 3.0).epsilon(1e-15));
  REQUIRE(script.peak == 10.0);
  REQUIRE(script.max_displacement == 0.9);
  REQUIRE(script.demand.components.empty());
  REQUIRE(script.demand.total == -1.0);
  REQUIRE(script.baseline == Baseline::dpgd_mwmpc);
  REQUIRE(script.events.empty());

  const ControlParams defaults;
  REQUIRE(script.control.dt == defaults.dt);
  REQUIRE(script.control.horizon == defaults.horizon);
  REQUIRE(script.control.input_bound == defaults.input_bound);

  SECTION("numeric total and equal_spacing baseline") {
    const ScenarioScript other = parse_scenario(R"({
      "constellation": {"count": 5, "fov_deg": 60.0},
      "demand": {"total": 12.5, "random_count": 3},
      "baseline": "equal_spacing"
    })");
    REQUIRE(other.demand.total == 12.5);
    REQUIRE(other.demand.random_count == 3);
    REQUIRE(other.baseline == Baseline::equal_spacing);
  }

  SECTION("explicit initial angles convert to radians") {
    const ScenarioScript other = parse_scenario(R"({
      "constellation": {"count": 3, "fov_deg": 60.0,
                        "initial_angles_deg": [0.0, 90.0, 200.0]}
    })");
    REQUIRE(other.initial_angles.size() == 3);
    REQUIRE(other.initial_angles[1] == Approx(pi / 2.0).epsilon(1e-15));
    REQUIRE(other.initial_angles[2] == Approx(200.0 * pi / 180.0).epsilon(1e-15));
  }

  SECTION("replenish spawn angle is optional but honored") {
    const ScenarioScript other = parse_scenario(R"({
      "constellation": {"count": 4, "fov_deg": 60.0},
      "events": [{"time_tu": 1.0, "kind": "replenish",
                  "additions": [{"id": 5, "next_id": 2, "prev_id": 1,
                                 "fov_deg": 60.0, "peak_intensity": 5.0,
                                 "initial_angle_deg": 45.0}]}]
    })");
    REQUIRE(other.events[0].additions[0].initial_angle.has_value());
    REQUIRE(*other.events[0].additions[0].initial_angle ==
            Approx(pi / 4.0).epsilon(1e-15));
  }
}

TEST_CASE("scenario parse failures name the offending field") {
  auto fails_with = [](const std::string& text, const std::string& needle) {
    REQUIRE_THROWS_MATCHES(parse_scenario(text), scenario_error,
                           Catch::Matchers::MessageMatches(ContainsSubstring(needle)));
  };

  fails_with("{not json", "scenario parse error");
  fails_with("[1, 2]", "expected an object");
  fails_with(R"({"constellation": {"count": 3, "fov_deg": 60}, "extra": 1})",
             "unknown key \"extra\"");
  fails_with(R"({"constellation": {"count": 3, "fov_deg": 60, "radius": 7}})",
             "constellation: unknown key \"radius\"");
  fails_with(R"({})", "missing key \"constellation\"");
  fails_with(R"({"constellation": {"fov_deg": 60}})", "missing key \"count\"");
  fails_with(R"({"constellation": {"count": "three", "fov_deg": 60}})",
             "expected an integer");
  fails_with(R"({"constellation": {"count": 3}})", "missing key \"fov_deg\"");
  fails_with(R"({"constellation": {"count": 3, "fov_deg": "wide"}})",
             "fov_deg: expected a number");
  fails_with(R"({"constellation": {"count": 3, "fov_deg": 60},
                 "demand": {"total": "half"}})",
             "match_initial_coverage");
  fails_with(R"({"constellation": {"count": 3, "fov_deg": 60},
                 "baseline": "other"})",
             "baseline");
  fails_with(R"({"constellation": {"count": 3, "fov_deg": 60},
                 "events": {"kind": "loss"}})",
             "events: expected an array");
  fails_with(R"({"constellation": {"count": 3, "fov_deg": 60},
                 "events": [{"time_tu": 1.0, "kind": "meteor", "ids": [1]}]})",
             "unknown event kind \"meteor\"");
  fails_with(R"({"constellation": {"count": 3, "fov_deg": 60},
                 "events": [{"kind": "loss", "ids": [1]}]})",
             "events[0]: missing key \"time_tu\"");
  fails_with(R"({"constellation": {"count": 3, "fov_deg": 60},
                 "events": [{"time_tu": 1.0, "kind": "loss"}]})",
             "missing key \"ids\"");
  fails_with(R"({"constellation": {"count": 3, "fov_deg": 60},
                 "events": [{"time_tu": 1.0, "kind": "loss", "ids": [1.5]}]})",
             "expected integer ids");
  fails_with(R"({"constellation": {"count": 3, "fov_deg": 60},
                 "events": [{"time_tu": 1.0, "kind": "cyber", "ids": [1]}]})",
             "needs a \"changes\" array");
  fails_with(R"({"constellation": {"count": 3, "fov_deg": 60},
                 "events": [{"time_tu": 1.0, "kind": "replenish", "ids": [9]}]})",
             "needs an \"additions\" array");
  fails_with(R"({"constellation": {"count": 3, "fov_deg": 60},
                 "events": [{"time_tu": 1.0, "kind": "cyber",
                             "changes": [{"id": 1, "fov_deg": 50,
                                          "peak_intensity": 8, "gain": 2}]}]})",
             "changes[0]: unknown key \"gain\"");
}

TEST_CASE("scenario files load with the stem as fallback name") {
  const std::string path = "json_case.json";
  {
    std::ofstream out(path);
    out << R"({"constellation": {"count": 4, "fov_deg": 70.0}})";
  }
  const ScenarioScript script = load_scenario(path);
  REQUIRE(script.name == "json_case");
  REQUIRE(script.count == 4);
  std::remove(path.c_str());

  SECTION("an explicit name beats the stem") {
    const std::string named = "named_case.json";
    {
      std::ofstream out(named);
      out << R"({"name": "proper", "constellation": {"count": 4, "fov_deg": 70.0}})";
    }
    REQUIRE(load_scenario(named).name == "proper");
    std::remove(named.c_str());
  }

  REQUIRE_THROWS_MATCHES(load_scenario("no_such_file.json"), scenario_error,
                         Catch::Matchers::MessageMatches(
                             ContainsSubstring("cannot open scenario file")));
}
