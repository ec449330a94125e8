#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "covsim/orchestrator.hpp"

namespace covsim {

struct report_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/**
 * @brief Shortest decimal form that parses back to the identical double.
 *
 * Everything written to timeline.csv goes through this, so re-reading the
 * file reproduces the run's numbers bit for bit and the summary can be
 * recomputed from the CSV exactly.
 */
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail_report {

inline double parse_double(const std::string& field, int line_no) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw report_error("timeline line " + std::to_string(line_no) +
                       ": bad number \"" + field + "\"");
  return v;
}

inline int parse_int(const std::string& field, int line_no) {
  int v = 0;
  const char* first = field.data();
  const char* last = first + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw report_error("timeline line " + std::to_string(line_no) +
                       ": bad integer \"" + field + "\"");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace detail_report

// Fixed leading columns, then one deviation column per satellite that ever
// exists in the run. Ordering is a published contract; plotting scripts key
// on it.
inline std::string timeline_header(const std::vector<int>& column_ids) {
  std::string h = "step,sim_time_tu,phase,J,cum_control_cost";
  for (int id : column_ids) h += ",dphi_" + std::to_string(id);
  return h;
}

/**
 * @brief Render a run as CSV. Angles become degrees on the way out; a
 * satellite that is dead or not yet spawned leaves its field empty.
 */
inline std::string timeline_csv(const ScenarioRun& run) {
  std::string out = timeline_header(run.column_ids);
  out += '\n';
  for (const MetricsRecord& rec : run.timeline) {
    out += std::to_string(rec.step);
    out += ',';
    out += format_number(rec.sim_time);
    out += ',';
    out += rec.phase;
    out += ',';
    out += format_number(rec.potential_value);
    out += ',';
    out += format_number(rec.control_cost);
    for (double d : rec.deviations) {
      out += ',';
      if (!std::isnan(d)) out += format_number(d * (180.0 / pi));
    }
    out += '\n';
  }
  return out;
}

// One parsed timeline.csv. Deviations stay in file units (degrees); the
// digest below never needs them.
struct TimelineRow {
  int step = 0;
  double sim_time = 0.0;
  std::string phase;
  double potential_value = 0.0;
  double control_cost = 0.0;
  std::vector<double> deviations_deg;
};

struct TimelineTable {
  std::vector<int> column_ids;
  std::vector<TimelineRow> rows;
};

inline TimelineTable parse_timeline_csv(const std::string& text) {
  using detail_report::parse_double;
  using detail_report::parse_int;
  using detail_report::split_csv_line;

  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw report_error("timeline is empty");

  TimelineTable table;
  const auto header = split_csv_line(line);
  const std::vector<std::string> fixed = {"step", "sim_time_tu", "phase", "J",
                                          "cum_control_cost"};
  if (header.size() < fixed.size())
    throw report_error("timeline header has too few columns");
  for (std::size_t c = 0; c < fixed.size(); ++c)
    if (header[c] != fixed[c])
      throw report_error("timeline header column " + std::to_string(c + 1) +
                         " is \"" + header[c] + "\", expected \"" + fixed[c] + "\"");
  for (std::size_t c = fixed.size(); c < header.size(); ++c) {
    if (header[c].rfind("dphi_", 0) != 0)
      throw report_error("timeline header column " + std::to_string(c + 1) +
                         " is \"" + header[c] + "\", expected a dphi_<id> column");
    table.column_ids.push_back(parse_int(header[c].substr(5), 1));
  }

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw report_error("timeline line " + std::to_string(line_no) + " has " +
                         std::to_string(fields.size()) + " fields, expected " +
                         std::to_string(header.size()));
    TimelineRow row;
    row.step = parse_int(fields[0], line_no);
    row.sim_time = parse_double(fields[1], line_no);
    row.phase = fields[2];
    row.potential_value = parse_double(fields[3], line_no);
    row.control_cost = parse_double(fields[4], line_no);
    row.deviations_deg.reserve(table.column_ids.size());
    for (std::size_t c = fixed.size(); c < fields.size(); ++c)
      row.deviations_deg.push_back(
          fields[c].empty() ? std::numeric_limits<double>::quiet_NaN()
                            : parse_double(fields[c], line_no));
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw report_error("timeline has no records");
  return table;
}

inline TimelineTable load_timeline_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw report_error("cannot open timeline file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_timeline_csv(buf.str());
  } catch (const report_error& e) {
    throw report_error(path + ": " + e.what());
  }
}

/**
 * @brief Everything the summary reports about one phase, recomputed from
 * rows alone.
 *
 * Planning happens at frozen sim time, so the records sharing the phase's
 * first timestamp are the planning records and their count is one more than
 * the planner round count. Converged J is the phase's final record; the
 * phase cost is the cumulative-cost delta across it.
 */
struct PhaseDigest {
  std::string phase;
  double first_potential = 0.0;
  double converged_potential = 0.0;
  double potential_change = 0.0;  // converged minus first (round-0) value
  int planner_rounds = 0;
  double control_cost = 0.0;
};

struct TimelineDigest {
  std::string variant;
  std::vector<PhaseDigest> phases;
  double total_control_cost = 0.0;
};

inline TimelineDigest digest_timeline(const TimelineTable& table,
                                      const std::string& variant) {
  TimelineDigest digest;
  digest.variant = variant;

  std::size_t k = 0;
  double cost_before = 0.0;
  while (k < table.rows.size()) {
    const std::string& label = table.rows[k].phase;
    for (const PhaseDigest& done : digest.phases)
      if (done.phase == label)
        throw report_error("phase \"" + label + "\" appears twice in the timeline");

    PhaseDigest d;
    d.phase = label;
    d.first_potential = table.rows[k].potential_value;
    const double frozen = table.rows[k].sim_time;
    int frozen_records = 0;
    std::size_t last = k;
    while (k < table.rows.size() && table.rows[k].phase == label) {
      if (table.rows[k].sim_time == frozen) ++frozen_records;
      last = k;
      ++k;
    }
    d.converged_potential = table.rows[last].potential_value;
    d.potential_change = d.converged_potential - d.first_potential;
    d.planner_rounds = frozen_records - 1;
    d.control_cost = table.rows[last].control_cost - cost_before;
    cost_before = table.rows[last].control_cost;
    digest.phases.push_back(std::move(d));
  }
  digest.total_control_cost = table.rows.back().control_cost;
  return digest;
}

// summary.json: exactly the numbers a reader can recompute from the CSV.
inline std::string summary_json(const ScenarioRun& run, const std::string& name) {
  nlohmann::ordered_json j;
  j["scenario"] = name;
  j["phases"] = nlohmann::ordered_json::array();
  for (const PhaseSummary& p : run.phases) {
    nlohmann::ordered_json phase;
    phase["phase"] = p.phase;
    phase["converged_potential"] = p.converged_potential;
    phase["planner_rounds"] = p.planner_rounds;
    phase["control_cost"] = p.control_cost;
    j["phases"].push_back(std::move(phase));
  }
  j["total_control_cost"] = control_cost_total(run.timeline);
  if (run.aborted) {
    j["aborted"] = true;
    j["diagnostic"] = run.diagnostic;
  }
  return j.dump(2) + "\n";
}

inline std::string certificates_json(const ScenarioRun& run) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const PhaseCertificate& cert : run.certificates) {
    nlohmann::ordered_json c;
    c["phase"] = cert.phase;
    c["all_stationary"] = cert.report.all_stationary;
    c["curvature_psd"] = cert.report.curvature_psd;
    c["satellites"] = nlohmann::ordered_json::array();
    for (const SatelliteCertificate& s : cert.report.satellites) {
      nlohmann::ordered_json e;
      e["id"] = s.id;
      e["classification"] = to_string(s.classification);
      e["residual"] = s.residual;
      e["gradient_norm"] = s.gradient_norm;
      e["inward_derivative"] = s.inward_derivative;
      c["satellites"].push_back(std::move(e));
    }
    c["pairs"] = nlohmann::ordered_json::array();
    for (const PairCertificate& p : cert.report.pairs) {
      nlohmann::ordered_json e;
      e["id_a"] = p.id_a;
      e["id_b"] = p.id_b;
      e["overlap"] = p.overlap;
      e["margin"] = p.margin;
      e["min_eigenvalue"] = p.min_eigenvalue;
      e["psd"] = p.psd;
      c["pairs"].push_back(std::move(e));
    }
    arr.push_back(std::move(c));
  }
  return arr.dump(2) + "\n";
}

/**
 * @brief Display name for a timeline path: the file stem, or the parent
 * directory when the stem is the generic "timeline" every run emits.
 */
inline std::string variant_name(const std::string& path) {
  std::size_t end = path.find_last_not_of('/');
  if (end == std::string::npos) return path;
  std::string p = path.substr(0, end + 1);
  const std::size_t slash = p.find_last_of('/');
  std::string base = slash == std::string::npos ? p : p.substr(slash + 1);
  const std::size_t dot = base.find_last_of('.');
  std::string stem = dot == std::string::npos || dot == 0 ? base : base.substr(0, dot);
  if (stem == "timeline" && slash != std::string::npos) {
    const std::string dir = p.substr(0, slash);
    const std::size_t up = dir.find_last_of('/');
    const std::string parent = up == std::string::npos ? dir : dir.substr(up + 1);
    if (!parent.empty()) return parent;
  }
  return stem;
}

// Comparing runs only makes sense phase by phase; refuse different shapes.
inline void check_alignment(const std::vector<TimelineDigest>& digests) {
  if (digests.empty()) throw report_error("no timelines to compare");
  const TimelineDigest& ref = digests.front();
  for (const TimelineDigest& other : digests) {
    bool same = other.phases.size() == ref.phases.size();
    for (std::size_t p = 0; same && p < ref.phases.size(); ++p)
      same = other.phases[p].phase == ref.phases[p].phase;
    if (!same) {
      auto labels = [](const TimelineDigest& d) {
        std::string s;
        for (const PhaseDigest& p : d.phases) {
          if (!s.empty()) s += ' ';
          s += p.phase;
        }
        return s;
      };
      throw report_error("phase structures do not align: \"" + ref.variant +
                         "\" has [" + labels(ref) + "] but \"" + other.variant +
                         "\" has [" + labels(other) + "]");
    }
  }
}

/**
 * @brief Plot-ready long format: one row per (phase, variant), phase-major,
 * with the deltas against the first variant spelled out.
 */
inline std::string long_format_csv(const std::vector<TimelineDigest>& digests) {
  check_alignment(digests);
  std::string out =
      "phase,variant,first_j,converged_j,j_change,planner_rounds,"
      "phase_cost,delta_converged_j,delta_phase_cost\n";
  for (std::size_t p = 0; p < digests.front().phases.size(); ++p) {
    const PhaseDigest& ref = digests.front().phases[p];
    for (const TimelineDigest& d : digests) {
      const PhaseDigest& ph = d.phases[p];
      out += ph.phase;
      out += ',';
      out += d.variant;
      out += ',';
      out += format_number(ph.first_potential);
      out += ',';
      out += format_number(ph.converged_potential);
      out += ',';
      out += format_number(ph.potential_change);
      out += ',';
      out += std::to_string(ph.planner_rounds);
      out += ',';
      out += format_number(ph.control_cost);
      out += ',';
      out += format_number(ph.converged_potential - ref.converged_potential);
      out += ',';
      out += format_number(ph.control_cost - ref.control_cost);
      out += '\n';
    }
  }
  return out;
}

inline std::string comparison_table(const std::vector<TimelineDigest>& digests) {
  check_alignment(digests);
  char buf[160];
  std::string out;
  auto line = [&](const char* phase, const char* variant, const std::string& j,
                  const std::string& dj, const std::string& rounds,
                  const std::string& cost) {
    std::snprintf(buf, sizeof(buf), "%-12s %-24s %14s %14s %8s %14s\n", phase,
                  variant, j.c_str(), dj.c_str(), rounds.c_str(), cost.c_str());
    out += buf;
  };
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };

  line("phase", "variant", "converged J", "J change", "rounds", "cost");
  for (std::size_t p = 0; p < digests.front().phases.size(); ++p)
    for (const TimelineDigest& d : digests) {
      const PhaseDigest& ph = d.phases[p];
      line(ph.phase.c_str(), d.variant.c_str(), num(ph.converged_potential),
           num(ph.potential_change), std::to_string(ph.planner_rounds),
           num(ph.control_cost));
    }
  for (const TimelineDigest& d : digests) {
    std::snprintf(buf, sizeof(buf), "total cost   %-24s %14s\n", d.variant.c_str(),
                  num(d.total_control_cost).c_str());
    out += buf;
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw report_error("cannot write file: " + path);
  out << content;
  if (!out) throw report_error("write failed: " + path);
}

}  // namespace covsim
