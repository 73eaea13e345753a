#pragma once

// Offline robustness monitor. Computes the quantitative semantics
//   rho(mu, t)        = -h(x(t))
//   rho(!phi, t)      = -rho(phi, t)
//   rho(and, t)       = min over kids,  rho(or, t) = max
//   rho(G[a,b], t)    = inf over [t+a, t+b]
//   rho(F[a,b], t)    = sup over [t+a, t+b]
//   rho(U[a,b], t)    = sup_{t1} min(rho(phi2, t1), inf_{t2 in [t,t1]} rho(phi1, t2))
// over a piecewise-linear trace, held constant after its last vertex. Windows
// over a bare predicate are evaluated exactly per trace segment; nested
// operators are evaluated on a dt grid joined with the trace breakpoints.
//
// The monitor shares only expression/track arithmetic with the planner; the
// temporal semantics here are written directly against this definition.

#include <map>
#include <string>
#include <vector>

#include "stlplan/formula.hpp"
#include "stlplan/track.hpp"

namespace stlplan {

struct Trajectory {
  std::map<RobotId, std::vector<Vertex>> tracks;

  double t_end() const {
    double e = 0.0;
    for (const auto& [r, vs] : tracks)
      if (!vs.empty() && vs.back().t > e) e = vs.back().t;
    return e;
  }
};

struct MonitorOptions {
  double dt = 0.05;   // grid spacing for nested operators
  double tol = 1e-6;  // verdict: satisfied iff rho >= -tol
};

struct PredicateStat {
  std::string text;  // printed as h <= 0
  double h_min = 0.0, h_max = 0.0;
};

struct MonitorReport {
  double rho = 0.0;
  bool satisfied = false;
  std::vector<PredicateStat> predicates;  // raw h extrema over the whole trace
};

// Robustness of the formula at start time t.
double robustness(const Formula& f, const Trajectory& tr, double t,
                  const MonitorOptions& opt = {});

// Verdict at t = 0 plus per-predicate diagnostics.
MonitorReport monitor(const Formula& f, const Trajectory& tr,
                      const MonitorOptions& opt = {});

}  // namespace stlplan
