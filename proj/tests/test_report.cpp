#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "covsim/report.hpp"

using namespace covsim;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

// Same shape as the orchestrator suite's fixture: one satellite under a
// demand bump heavy enough that hitting it raises the ring cost.
ScenarioScript sample_script() {
  ScenarioScript script;
  script.name = "sample";
  script.count = 5;
  script.altitude = 0.8;
  script.fov = 100.0 * pi / 180.0;
  script.peak = 10.0;
  script.max_displacement = 0.9;
  script.initial_angles = {0.0, 0.25, 0.5, 3.0, 4.5};
  script.demand.components = {{pi, 15.0 * pi / 180.0, 1.0}};
  script.demand.total = 30.0;
  script.planner.base_step = 0.3;
  script.planner.exit_tolerance = 3e-3;

  Event hit;
  hit.time = 30.0;
  hit.kind = EventKind::cyber;
  hit.changes = {{4, 60.0 * pi / 180.0, 5.0}};
  Event restore;
  restore.time = 90.0;
  restore.kind = EventKind::recover;
  restore.changes = {{4, 100.0 * pi / 180.0, 10.0}};
  script.events = {hit, restore};
  return script;
}

const ScenarioRun& sample_run() {
  static const ScenarioRun run = run_scenario(sample_script());
  return run;
}

const ScenarioRun& baseline_run() {
  static const ScenarioRun run = [] {
    ScenarioScript script = sample_script();
    script.baseline = Baseline::equal_spacing;
    script.initial_angles.clear();  // lattice: the spacing rule's fixed point
    return run_scenario(script);
  }();
  return run;
}

}  // namespace

TEST_CASE("number formatting round trips exactly") {
  const std::vector<double> probes = {0.0,    -0.0,   0.6,       1.0 / 3.0,
                                      1e-300, 54.551, -3.222145, 6.02e23};
  for (double v : probes) {
    const std::string s = format_number(v);
    double back = 0.0;
    REQUIRE(std::from_chars(s.data(), s.data() + s.size(), back).ec == std::errc{});
    REQUIRE(std::memcmp(&back, &v, sizeof v) == 0);
  }
  REQUIRE(format_number(0.6) == "0.6");  // shortest form, not 17 digits
}

TEST_CASE("timeline csv writes the published column contract") {
  const ScenarioRun& run = sample_run();
  const std::string csv = timeline_csv(run);

  // golden header: fixed columns then one dphi per satellite, in roster order
  REQUIRE(csv.substr(0, csv.find('\n')) ==
          "step,sim_time_tu,phase,J,cum_control_cost,dphi_1,dphi_2,dphi_3,dphi_4,dphi_5");

  const TimelineTable table = parse_timeline_csv(csv);
  REQUIRE(table.column_ids == std::vector<int>{1, 2, 3, 4, 5});
  REQUIRE(table.rows.size() == run.timeline.size());

  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const TimelineRow& row = table.rows[k];
    const MetricsRecord& rec = run.timeline[k];
    REQUIRE(row.step == rec.step);
    REQUIRE(row.sim_time == rec.sim_time);  // bitwise, shortest-form round trip
    REQUIRE(row.phase == rec.phase);
    REQUIRE(row.potential_value == rec.potential_value);
    REQUIRE(row.control_cost == rec.control_cost);
    REQUIRE(row.deviations_deg.size() == rec.deviations.size());
    for (std::size_t c = 0; c < rec.deviations.size(); ++c) {
      if (std::isnan(rec.deviations[c]))
        REQUIRE(std::isnan(row.deviations_deg[c]));
      else
        REQUIRE(row.deviations_deg[c] == rec.deviations[c] * (180.0 / pi));
    }
  }
}

TEST_CASE("rendering is deterministic across reruns") {
  const std::string once = timeline_csv(run_scenario(sample_script()));
  const std::string twice = timeline_csv(run_scenario(sample_script()));
  REQUIRE(once == twice);
}

TEST_CASE("summary matches a recomputation from the csv alone") {
  const ScenarioRun& run = sample_run();
  const TimelineDigest digest =
      digest_timeline(parse_timeline_csv(timeline_csv(run)), "sample");

  REQUIRE(digest.phases.size() == run.phases.size());
  for (std::size_t p = 0; p < run.phases.size(); ++p) {
    const PhaseDigest& d = digest.phases[p];
    const PhaseSummary& s = run.phases[p];
    REQUIRE(d.phase == s.phase);
    REQUIRE(d.converged_potential == s.converged_potential);
    REQUIRE(d.planner_rounds == s.planner_rounds);
    REQUIRE(d.control_cost == s.control_cost);
  }
  REQUIRE(digest.total_control_cost == control_cost_total(run.timeline));

  // and the emitted JSON carries exactly those numbers
  const auto j = nlohmann::json::parse(summary_json(run, "sample"));
  REQUIRE(j["scenario"] == "sample");
  REQUIRE(j["phases"].size() == digest.phases.size());
  for (std::size_t p = 0; p < digest.phases.size(); ++p) {
    REQUIRE(j["phases"][p]["phase"] == digest.phases[p].phase);
    REQUIRE(j["phases"][p]["converged_potential"].get<double>() ==
            digest.phases[p].converged_potential);
    REQUIRE(j["phases"][p]["planner_rounds"].get<int>() ==
            digest.phases[p].planner_rounds);
    REQUIRE(j["phases"][p]["control_cost"].get<double>() ==
            digest.phases[p].control_cost);
  }
  REQUIRE(j["total_control_cost"].get<double>() == digest.total_control_cost);
  REQUIRE_FALSE(j.contains("aborted"));
}

TEST_CASE("digest mechanics on a handcrafted table") {
  const std::string csv =
      "step,sim_time_tu,phase,J,cum_control_cost,dphi_7\n"
      "0,0,init,10,0,0\n"          // round 0
      "1,0,init,9,0,0\n"           // round 1
      "2,0,init,8,0,0\n"           // round 2
      "3,0.5,init,7,1.5,2\n"       // flight
      "4,1,init,6,2,2\n"
      "5,1,attack-1,9,2,\n"        // new phase, one planning record, dead sat
      "6,1.5,attack-1,8.5,3,\n";
  const TimelineTable table = parse_timeline_csv(csv);
  REQUIRE(table.column_ids == std::vector<int>{7});
  REQUIRE(std::isnan(table.rows[5].deviations_deg[0]));

  const TimelineDigest digest = digest_timeline(table, "hand");
  REQUIRE(digest.phases.size() == 2);
  REQUIRE(digest.phases[0].phase == "init");
  REQUIRE(digest.phases[0].planner_rounds == 2);
  REQUIRE(digest.phases[0].first_potential == 10.0);
  REQUIRE(digest.phases[0].converged_potential == 6.0);
  REQUIRE(digest.phases[0].potential_change == -4.0);
  REQUIRE(digest.phases[0].control_cost == 2.0);
  REQUIRE(digest.phases[1].planner_rounds == 0);
  REQUIRE(digest.phases[1].control_cost == 1.0);
  REQUIRE(digest.total_control_cost == 3.0);
}

TEST_CASE("malformed timelines are refused with located errors") {
  auto fails_with = [](const std::string& text, const std::string& needle) {
    REQUIRE_THROWS_MATCHES(parse_timeline_csv(text), report_error,
                           Catch::Matchers::MessageMatches(ContainsSubstring(needle)));
  };
  fails_with("", "empty");
  fails_with("step,sim_time_tu,phase,J,cum_control_cost\n", "no records");
  fails_with("step,time,phase,J,cum_control_cost\n0,0,init,1,0\n", "sim_time_tu");
  fails_with("step,sim_time_tu,phase,J,cum_control_cost,wobble\n", "dphi_<id>");
  fails_with("step,sim_time_tu,phase,J,cum_control_cost\n0,0,init,1\n",
             "4 fields, expected 5");
  fails_with("step,sim_time_tu,phase,J,cum_control_cost\n0,zero,init,1,0\n",
             "line 2");

  // a label coming back after another phase would make digests ambiguous
  const std::string resurrected =
      "step,sim_time_tu,phase,J,cum_control_cost\n"
      "0,0,init,1,0\n"
      "1,1,attack-1,2,0\n"
      "2,2,init,1,0\n";
  REQUIRE_THROWS_MATCHES(digest_timeline(parse_timeline_csv(resurrected), "x"),
                         report_error,
                         Catch::Matchers::MessageMatches(ContainsSubstring("twice")));
}

TEST_CASE("variant names come from the path") {
  REQUIRE(variant_name("runs/dpgd/timeline.csv") == "dpgd");
  REQUIRE(variant_name("out/timeline.csv") == "out");
  REQUIRE(variant_name("cyber_full.csv") == "cyber_full");
  REQUIRE(variant_name("a/b/custom.csv") == "custom");
  REQUIRE(variant_name("timeline.csv") == "timeline");  // nothing better to use
}

TEST_CASE("comparison aligns phases and exposes baseline deltas") {
  const TimelineDigest game =
      digest_timeline(parse_timeline_csv(timeline_csv(sample_run())), "game");
  const TimelineDigest spacing =
      digest_timeline(parse_timeline_csv(timeline_csv(baseline_run())), "spacing");
  const std::vector<TimelineDigest> both = {game, spacing};

  REQUIRE_NOTHROW(check_alignment(both));

  const std::string csv = long_format_csv(both);
  REQUIRE(csv.substr(0, csv.find('\n')) ==
          "phase,variant,first_j,converged_j,j_change,planner_rounds,"
          "phase_cost,delta_converged_j,delta_phase_cost");
  // one row per (phase, variant), phase-major
  REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 2);
  REQUIRE_THAT(csv, ContainsSubstring("init,game,"));
  REQUIRE_THAT(csv, ContainsSubstring("init,spacing,"));
  REQUIRE_THAT(csv, ContainsSubstring("recovery-1,spacing,"));

  // the spacing baseline never adapts: zero change, zero rounds, zero cost
  for (const PhaseDigest& p : spacing.phases) {
    REQUIRE(p.potential_change == 0.0);
    REQUIRE(p.planner_rounds == 0);
    REQUIRE(p.control_cost == 0.0);
  }
  // while the game planner improves the attacked phase at some fuel cost
  REQUIRE(game.phases[1].potential_change < 0.0);
  REQUIRE(game.total_control_cost > 0.0);

  const std::string table = comparison_table(both);
  REQUIRE_THAT(table, ContainsSubstring("converged J"));
  REQUIRE_THAT(table, ContainsSubstring("total cost"));
  REQUIRE_THAT(table, ContainsSubstring("spacing"));

  // different event structure cannot be aligned
  TimelineDigest truncated = spacing;
  truncated.phases.pop_back();
  truncated.variant = "short";
  REQUIRE_THROWS_MATCHES(
      check_alignment({game, truncated}), report_error,
      Catch::Matchers::MessageMatches(ContainsSubstring("do not align")));
}

TEST_CASE("certificates serialize with their classifications") {
  const ScenarioRun& run = sample_run();
  REQUIRE_FALSE(run.certificates.empty());
  const auto j = nlohmann::json::parse(certificates_json(run));
  REQUIRE(j.is_array());
  REQUIRE(j.size() == run.certificates.size());
  for (std::size_t k = 0; k < run.certificates.size(); ++k) {
    const PhaseCertificate& cert = run.certificates[k];
    REQUIRE(j[k]["phase"] == cert.phase);
    REQUIRE(j[k]["all_stationary"].get<bool>() == cert.report.all_stationary);
    REQUIRE(j[k]["curvature_psd"].get<bool>() == cert.report.curvature_psd);
    REQUIRE(j[k]["satellites"].size() == cert.report.satellites.size());
    for (std::size_t s = 0; s < cert.report.satellites.size(); ++s) {
      const SatelliteCertificate& sat = cert.report.satellites[s];
      REQUIRE(j[k]["satellites"][s]["id"].get<int>() == sat.id);
      REQUIRE(j[k]["satellites"][s]["classification"] ==
              std::string(to_string(sat.classification)));
      REQUIRE(j[k]["satellites"][s]["residual"].get<double>() == sat.residual);
    }
    REQUIRE(j[k]["pairs"].size() == cert.report.pairs.size());
    for (std::size_t p = 0; p < cert.report.pairs.size(); ++p) {
      REQUIRE(j[k]["pairs"][p]["id_a"].get<int>() == cert.report.pairs[p].id_a);
      REQUIRE(j[k]["pairs"][p]["psd"].get<bool>() == cert.report.pairs[p].psd);
      REQUIRE(j[k]["pairs"][p]["margin"].get<double>() ==
              cert.report.pairs[p].margin);
    }
  }
}

TEST_CASE("aborted runs keep their diagnostic in the summary") {
  ScenarioScript script = sample_script();
  script.planner.max_rounds = 3;
  const ScenarioRun run = run_scenario(script);
  REQUIRE(run.aborted);
  const auto j = nlohmann::json::parse(summary_json(run, script.name));
  REQUIRE(j["aborted"].get<bool>());
  REQUIRE_THAT(j["diagnostic"].get<std::string>(), ContainsSubstring("planner"));
}

TEST_CASE("files round trip through disk") {
  const std::string path = "test_report_roundtrip.csv";
  const std::string csv = timeline_csv(sample_run());
  write_text_file(path, csv);
  const TimelineTable table = load_timeline_csv(path);
  REQUIRE(table.rows.size() == sample_run().timeline.size());
  std::remove(path.c_str());

  REQUIRE_THROWS_MATCHES(load_timeline_csv("does/not/exist.csv"), report_error,
                         Catch::Matchers::MessageMatches(ContainsSubstring("cannot open")));
}
