#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "covsim/report.hpp"
#include "covsim/scenario_json.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_user = 1;      // bad usage, unreadable or invalid input, failed run
constexpr int exit_internal = 2;  // anything that should never happen

int cmd_validate(const std::string& path) {
  const covsim::ScenarioScript script = covsim::load_scenario(path);
  const std::vector<std::string> problems = covsim::validate_script(script);
  if (!problems.empty()) {
    for (const std::string& p : problems)
      std::cout << path << ": " << p << "\n";
    return exit_user;
  }
  std::cout << script.name << ": ok, " << script.count << " satellites, "
            << script.events.size() << " events\n";
  return exit_ok;
}

int cmd_run(const std::string& path, const std::string& out_dir,
            const std::set<std::string>& emit, unsigned seed) {
  const covsim::ScenarioScript script = covsim::load_scenario(path);
  const covsim::ScenarioRun run = covsim::run_scenario(script, seed);

  std::filesystem::create_directories(out_dir);
  const auto file = [&](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  if (emit.count("timeline"))
    covsim::write_text_file(file("timeline.csv"), covsim::timeline_csv(run));
  if (emit.count("summary"))
    covsim::write_text_file(file("summary.json"),
                            covsim::summary_json(run, script.name));
  if (emit.count("certificates"))
    covsim::write_text_file(file("certificates.json"),
                            covsim::certificates_json(run));

  if (run.aborted) {
    std::cerr << "run aborted: " << run.diagnostic << "\n";
    return exit_user;
  }
  for (const covsim::PhaseSummary& p : run.phases)
    std::cout << p.phase << ": J " << p.converged_potential << ", rounds "
              << p.planner_rounds << ", cost " << p.control_cost << "\n";
  std::cout << "total cost " << covsim::control_cost_total(run.timeline) << "\n";
  return exit_ok;
}

int cmd_report(const std::vector<std::string>& paths, const std::string& out_csv) {
  std::vector<covsim::TimelineDigest> digests;
  std::set<std::string> taken;
  for (const std::string& path : paths) {
    std::string name = covsim::variant_name(path);
    for (int k = 2; taken.count(name); ++k)
      name = covsim::variant_name(path) + "#" + std::to_string(k);
    taken.insert(name);
    digests.push_back(covsim::digest_timeline(covsim::load_timeline_csv(path), name));
  }

  std::cout << covsim::comparison_table(digests);
  const std::string long_csv = covsim::long_format_csv(digests);
  if (out_csv.empty())
    std::cout << "\n" << long_csv;
  else
    covsim::write_text_file(out_csv, long_csv);
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constellation coverage simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("file", scenario_path, "scenario JSON file")->required();

  std::string run_path;
  std::string out_dir = ".";
  std::vector<std::string> emit = {"timeline", "summary", "certificates"};
  unsigned seed = 12345;
  auto* run = app.add_subcommand("run", "Simulate a scenario and write its outputs");
  run->add_option("file", run_path, "scenario JSON file")->required();
  run->add_option("-o,--out", out_dir, "output directory");
  run->add_option("--emit", emit, "subset of {timeline, summary, certificates}")
      ->check(CLI::IsMember({"timeline", "summary", "certificates"}));
  run->add_option("--seed", seed, "demand randomization seed");

  std::vector<std::string> report_paths;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Compare timeline CSVs phase by phase");
  report->add_option("csv", report_paths, "timeline.csv files")->required();
  report->add_option("-o,--out", report_out, "write the long-format CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_user;  // --help lands here with code 0
  }

  try {
    if (validate->parsed()) return cmd_validate(scenario_path);
    if (run->parsed())
      return cmd_run(run_path, out_dir, {emit.begin(), emit.end()}, seed);
    return cmd_report(report_paths, report_out);
  } catch (const covsim::scenario_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_user;
  } catch (const covsim::report_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_user;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return exit_internal;
  }
}
