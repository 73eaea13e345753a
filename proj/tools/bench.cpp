// Benchmark: run the planner on a scenario with the OpenMP runner and with
// the serial reference runner, report wall time each way, and verify the two
// produce identical trajectories (the swarm loop is written so that thread
// count never changes results).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "stlplan/planner.hpp"
#include "stlplan/scenario.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

bool identical(const stlplan::Trajectory& a, const stlplan::Trajectory& b) {
  if (a.tracks.size() != b.tracks.size()) return false;
  for (const auto& [r, va] : a.tracks) {
    auto it = b.tracks.find(r);
    if (it == b.tracks.end() || it->second.size() != va.size()) return false;
    for (size_t i = 0; i < va.size(); ++i) {
      const stlplan::Vertex &x = va[i], &y = it->second[i];
      // bit-for-bit, not approximate: the two runners must agree exactly
      if (std::memcmp(&x.t, &y.t, sizeof(double)) != 0) return false;
      if (x.x.size() != y.x.size()) return false;
      for (size_t k = 0; k < x.x.size(); ++k)
        if (std::memcmp(&x.x[k], &y.x[k], sizeof(double)) != 0) return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stlplan benchmark: parallel vs serial runner"};
  std::string scenario;
  int repeat = 1;
  app.add_option("scenario", scenario, "scenario JSON file")->required();
  app.add_option("--repeat", repeat, "timed repetitions per runner")
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    stlplan::Scenario sc = stlplan::load_scenario(scenario);
    std::printf("scenario '%s': %zu robots, formula %s\n", sc.name.c_str(),
                sc.robots.size(), sc.formula_text.c_str());

    stlplan::PlanResult par, ser;
    double t_par = 1e300, t_ser = 1e300;
    for (int i = 0; i < repeat; ++i) {
      stlplan::PlannerParams p = sc.params;
      p.parallel = true;
      auto a = Clock::now();
      par = stlplan::plan(sc.formula, sc.robots, p);
      t_par = std::min(t_par, seconds(a, Clock::now()));

      p.parallel = false;
      a = Clock::now();
      ser = stlplan::plan(sc.formula, sc.robots, p);
      t_ser = std::min(t_ser, seconds(a, Clock::now()));
    }

    std::printf("parallel: %8.3f s  (%s, %ld iterations)\n", t_par,
                par.satisfied ? "satisfied" : "unsatisfied", par.iterations);
    std::printf("serial:   %8.3f s  (%s, %ld iterations)\n", t_ser,
                ser.satisfied ? "satisfied" : "unsatisfied", ser.iterations);
    if (t_ser > 0.0) std::printf("speedup:  %8.2fx\n", t_ser / t_par);

    bool same = identical(par.trajectory, ser.trajectory);
    std::printf("trajectories identical: %s\n", same ? "yes" : "NO");
    return same ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
