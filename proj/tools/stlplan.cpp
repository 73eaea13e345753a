// stlplan command line tool: plan trajectories for a scenario, monitor a
// trajectory against a scenario's formula, or render a quick SVG plot.
//
// Exit codes: 0 success / satisfied, 1 planner or monitor says unsatisfied,
// 2 invalid input (bad arguments, malformed scenario or trajectory),
// 3 unexpected runtime failure.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "stlplan/formula.hpp"
#include "stlplan/monitor.hpp"
#include "stlplan/planner.hpp"
#include "stlplan/plot.hpp"
#include "stlplan/scenario.hpp"

namespace {

bool log_enabled() {
  const char* v = std::getenv("STLPLAN_LOG");
  return v && *v && std::string(v) != "0";
}

void logline(const std::string& s) {
  if (log_enabled()) std::cerr << "[stlplan] " << s << "\n";
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot write file: " + path);
  std::fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
}

struct PlanArgs {
  std::string scenario;
  std::string out;
  std::string out_dir;
  std::string report;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double time_limit = -1.0;
  int attempts = 0;
  bool serial = false;
};

int run_plan(PlanArgs a) {
  stlplan::Scenario sc = stlplan::load_scenario(a.scenario);
  if (!a.out_dir.empty()) {
    std::filesystem::create_directories(a.out_dir);
    std::filesystem::path d(a.out_dir);
    if (a.out.empty()) a.out = (d / "trajectory.txt").string();
    if (a.report.empty()) a.report = (d / "report.json").string();
  }
  logline("scenario '" + sc.name + "' hash " + hash_hex(sc.hash) + ", " +
          std::to_string(sc.robots.size()) + " robots");

  stlplan::PlannerParams p = sc.params;
  if (a.seed_set) p.seed = a.seed;
  if (a.time_limit >= 0.0) p.time_limit_s = a.time_limit;
  if (a.attempts > 0) p.attempts = a.attempts;
  if (a.serial) p.parallel = false;
  logline("planning: seed " + std::to_string(p.seed) + ", L " + std::to_string(p.L) +
          ", L' " + std::to_string(p.Lp) + ", attempts " + std::to_string(p.attempts) +
          (p.parallel ? ", parallel" : ", serial"));

  stlplan::PlanResult res = stlplan::plan(sc.formula, sc.robots, p);

  char wall[32];
  std::snprintf(wall, sizeof wall, "%.2f", res.wall_s);
  std::cout << (res.satisfied ? "satisfied" : "unsatisfied") << " after "
            << res.attempts_used << " attempt(s), " << res.iterations
            << " iterations, " << res.messages << " messages, " << wall << " s\n";
  if (!res.note.empty()) std::cout << "note: " << res.note << "\n";

  if (!a.out.empty()) {
    std::map<std::string, std::string> header{
        {"scenario", sc.name},
        {"scenario_hash", hash_hex(sc.hash)},
        {"formula", sc.formula_text},
        {"seed", std::to_string(p.seed)},
        {"satisfied", res.satisfied ? "true" : "false"},
    };
    stlplan::write_trajectory(a.out, res.trajectory, header);
    logline("trajectory written to " + a.out);
  }
  if (!a.report.empty()) {
    write_text(a.report, stlplan::report_json(sc, res));
    logline("report written to " + a.report);
  }
  return res.satisfied ? 0 : 1;
}

struct MonitorArgs {
  std::string first;
  std::string second;
  std::string formula;
  std::string report;
  double dt = 0.05;
  double tol = 1e-6;
};

// Two call shapes: `monitor <scenario> <trajectory>` checks against the
// scenario's formula (warning when the trajectory was planned for a different
// scenario), and `monitor <trajectory> --formula <text>` checks a bare
// formula with no scenario file at all.
int run_monitor(const MonitorArgs& a) {
  stlplan::Formula formula;
  stlplan::TrajectoryFile tf;
  if (!a.formula.empty()) {
    if (!a.second.empty())
      throw std::invalid_argument("--formula takes a single trajectory argument");
    formula = stlplan::parse_formula(a.formula);
    tf = stlplan::read_trajectory(a.first);
  } else {
    if (a.second.empty())
      throw std::invalid_argument("monitor needs a scenario and a trajectory, "
                                  "or a trajectory with --formula");
    stlplan::Scenario sc = stlplan::load_scenario(a.first);
    formula = sc.formula;
    tf = stlplan::read_trajectory(a.second);
    auto it = tf.header.find("scenario_hash");
    if (it != tf.header.end() && it->second != hash_hex(sc.hash))
      std::cerr << "warning: trajectory was planned for scenario hash " << it->second
                << ", this scenario hashes to " << hash_hex(sc.hash) << "\n";
  }

  double th = stlplan::time_horizon(formula);
  if (tf.trajectory.t_end() + 1e-9 < th) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "trajectory ends at %.6g s, shorter than the formula horizon %.6g s",
                  tf.trajectory.t_end(), th);
    throw std::invalid_argument(msg);
  }

  stlplan::MonitorOptions opt;
  opt.dt = a.dt;
  opt.tol = a.tol;
  stlplan::MonitorReport rep = stlplan::monitor(formula, tf.trajectory, opt);

  if (!a.report.empty()) {
    write_text(a.report, stlplan::monitor_json(rep));
    logline("report written to " + a.report);
  }
  char rho[32];
  std::snprintf(rho, sizeof rho, "%.6g", rep.rho);
  std::cout << (rep.satisfied ? "satisfied" : "unsatisfied") << " rho = " << rho
            << "\n";
  for (const auto& ps : rep.predicates) {
    char lo[32], hi[32];
    std::snprintf(lo, sizeof lo, "%.6g", ps.h_min);
    std::snprintf(hi, sizeof hi, "%.6g", ps.h_max);
    std::cout << "  " << ps.text << "  h in [" << lo << ", " << hi << "]\n";
  }
  return rep.satisfied ? 0 : 1;
}

struct PlotArgs {
  std::string scenario;
  std::string trajectory;
  std::string out = "trajectory.svg";
};

int run_plot(const PlotArgs& a) {
  stlplan::Scenario sc = stlplan::load_scenario(a.scenario);
  stlplan::TrajectoryFile tf = stlplan::read_trajectory(a.trajectory);
  stlplan::write_svg(a.out, tf.trajectory, &sc.formula, sc.name);
  std::cout << "plot written to " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-robot STL trajectory planning"};
  app.require_subcommand(1);

  PlanArgs pa;
  CLI::App* plan = app.add_subcommand("plan", "plan trajectories for a scenario");
  plan->add_option("scenario", pa.scenario, "scenario JSON file")->required();
  plan->add_option("-o,--output", pa.out, "trajectory output file");
  plan->add_option("--out", pa.out_dir,
                   "output directory (writes trajectory.txt and report.json)");
  plan->add_option("--report", pa.report, "JSON report output file");
  plan->add_option("--seed", pa.seed, "override the scenario seed")
      ->check(CLI::NonNegativeNumber);
  plan->add_option("--time-limit", pa.time_limit, "wall clock budget in seconds");
  plan->add_option("--attempts", pa.attempts, "override the attempt count");
  plan->add_flag("--serial", pa.serial, "use the serial reference runner");
  plan->callback([&] { pa.seed_set = plan->count("--seed") > 0; });

  MonitorArgs ma;
  CLI::App* mon = app.add_subcommand("monitor", "check a trajectory against a formula");
  mon->add_option("scenario-or-trajectory", ma.first,
                  "scenario JSON file (or the trajectory when --formula is given)")
      ->required();
  mon->add_option("trajectory", ma.second, "trajectory file");
  mon->add_option("--formula", ma.formula, "formula text instead of a scenario");
  mon->add_option("--dt,--delta", ma.dt, "monitor grid spacing")
      ->check(CLI::PositiveNumber);
  mon->add_option("--tol", ma.tol, "robustness tolerance for the verdict");
  mon->add_option("--report", ma.report, "JSON report output file");

  PlotArgs ga;
  CLI::App* plot = app.add_subcommand("plot", "render a trajectory to SVG");
  plot->add_option("scenario", ga.scenario, "scenario JSON file")->required();
  plot->add_option("trajectory", ga.trajectory, "trajectory file")->required();
  plot->add_option("-o,--output,--out", ga.out, "SVG output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (plan->parsed()) return run_plan(pa);
    if (mon->parsed()) return run_monitor(ma);
    return run_plot(ga);
  } catch (const stlplan::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const stlplan::UnsupportedTransform& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const stlplan::EvalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 3;
  }
}
