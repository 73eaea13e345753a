#pragma once

// Scenario files (JSON), trajectory files (column text), and report
// serialization for the CLI.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stlplan/formula.hpp"
#include "stlplan/monitor.hpp"
#include "stlplan/planner.hpp"

namespace stlplan {

struct Scenario {
  std::string name;
  std::string formula_text;
  Formula formula;
  std::vector<RobotSpec> robots;
  PlannerParams params;
  std::uint64_t hash = 0;  // content hash of the canonical scenario
};

// Parses and validates scenario JSON: robots with consistent boxes, a formula
// whose predicates are scalar, reference declared robots only, and couple at
// most two robots each.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

// Column text format: '# key: value' header lines, then one row per waypoint,
// 'robot t c0 c1 ...' with full double precision, grouped by robot with
// strictly increasing times.
void write_trajectory(const std::string& path, const Trajectory& tr,
                      const std::map<std::string, std::string>& header);

struct TrajectoryFile {
  Trajectory trajectory;
  std::map<std::string, std::string> header;
};
TrajectoryFile read_trajectory(const std::string& path);

std::string report_json(const Scenario& sc, const PlanResult& res);
std::string monitor_json(const MonitorReport& rep);

}  // namespace stlplan
