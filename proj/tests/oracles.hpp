#pragma once

// Shared helpers for the test suites: random generators for expressions,
// formulas and trajectories, and small reference implementations written
// directly against the definitions. The reference code deliberately avoids
// the library's own algorithms (no merge_chain, no closed-form extrema) so
// that agreement between the two is evidence, not tautology.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "stlplan/formula.hpp"
#include "stlplan/monitor.hpp"
#include "stlplan/rng.hpp"
#include "stlplan/validity.hpp"

namespace testutil {

using namespace stlplan;

// Dyadic rationals keep every sum below exactly representable, so oracle and
// implementation can be compared with zero tolerance even though they add
// the same quantities in different orders.
inline double half_units(Rng& rng, int max_halves) {
  return 0.5 * static_cast<double>(rng.pick(static_cast<size_t>(max_halves) + 1));
}

inline double quarter_units(Rng& rng, int lo_q, int hi_q) {
  return 0.25 * static_cast<double>(static_cast<long>(lo_q) +
                                    static_cast<long>(rng.pick(hi_q - lo_q + 1)));
}

// --- expressions -----------------------------------------------------------

// Affine scalar over the declared robots: c0 + ct*t + sum ck * x_r[k].
inline Expr random_affine(Rng& rng, int nrobots, int dim) {
  Expr e = Expr::constant(quarter_units(rng, -16, 16));
  if (rng.u01() < 0.3)
    e = Expr::binary(ExprKind::Add, e,
                     Expr::binary(ExprKind::Mul,
                                  Expr::constant(quarter_units(rng, -4, 4)),
                                  Expr::time()));
  int terms = 1 + static_cast<int>(rng.pick(2));
  for (int i = 0; i < terms; ++i) {
    RobotId r = 1 + static_cast<RobotId>(rng.pick(nrobots));
    int k = static_cast<int>(rng.pick(dim));
    double c = quarter_units(rng, -8, 8);
    if (c == 0.0) c = 1.0;
    Expr term = Expr::binary(ExprKind::Mul, Expr::constant(c), Expr::state(r, k));
    e = Expr::binary(ExprKind::Add, e, term);
  }
  return e;
}

// Smooth scalar expression for gradient checks. Stays away from the kinks
// and poles: no abs, no division, norm only over offset arguments, exp over
// damped arguments.
inline Expr random_smooth(Rng& rng, int nrobots, int dim, int depth) {
  if (depth == 0) {
    switch (rng.pick(4)) {
      case 0: return Expr::constant(rng.uniform(-2.0, 2.0));
      case 1: return Expr::time();
      default: {
        RobotId r = 1 + static_cast<RobotId>(rng.pick(nrobots));
        return Expr::state(r, static_cast<int>(rng.pick(dim)));
      }
    }
  }
  switch (rng.pick(7)) {
    case 0:
      return Expr::binary(ExprKind::Add, random_smooth(rng, nrobots, dim, depth - 1),
                          random_smooth(rng, nrobots, dim, depth - 1));
    case 1:
      return Expr::binary(ExprKind::Sub, random_smooth(rng, nrobots, dim, depth - 1),
                          random_smooth(rng, nrobots, dim, depth - 1));
    case 2:
      return Expr::binary(ExprKind::Mul, random_smooth(rng, nrobots, dim, depth - 1),
                          random_smooth(rng, nrobots, dim, depth - 1));
    case 3:
      return Expr::unary(ExprKind::Sin, random_smooth(rng, nrobots, dim, depth - 1));
    case 4:
      return Expr::unary(ExprKind::Cos, random_smooth(rng, nrobots, dim, depth - 1));
    case 5:
      return Expr::unary(
          ExprKind::Exp,
          Expr::binary(ExprKind::Mul, Expr::constant(0.3),
                       random_smooth(rng, nrobots, dim, depth - 1)));
    default: {
      RobotId r = 1 + static_cast<RobotId>(rng.pick(nrobots));
      Expr shifted = Expr::binary(
          ExprKind::Sub, Expr::state(r, -1),
          Expr::constant(3.0 + rng.uniform(0.0, 2.0)));
      return Expr::unary(ExprKind::Norm, shifted);
    }
  }
}

// --- formulas ---------------------------------------------------------------

struct FormulaGenOptions {
  int nrobots = 2;
  int dim = 2;
  int max_depth = 3;
  bool allow_not = true;
  bool allow_until = false;
  int max_window_halves = 12;  // windows are multiples of 0.5 up to this
};

inline Formula random_formula(Rng& rng, const FormulaGenOptions& o, int depth) {
  auto window = [&](double& a, double& b) {
    a = half_units(rng, o.max_window_halves);
    b = a + 0.5 + half_units(rng, o.max_window_halves);
  };
  auto leaf = [&] {
    Expr h = random_affine(rng, o.nrobots, o.dim);
    return Formula::predicate(Predicate::make(h));
  };
  if (depth <= 0) return leaf();

  size_t faces = 6 + (o.allow_not ? 1u : 0u) + (o.allow_until ? 1u : 0u);
  switch (rng.pick(faces)) {
    case 0:
    case 1:
      return leaf();
    case 2: {
      double a, b;
      window(a, b);
      return Formula::always(a, b, random_formula(rng, o, depth - 1));
    }
    case 3: {
      double a, b;
      window(a, b);
      return Formula::eventually(a, b, random_formula(rng, o, depth - 1));
    }
    case 4: {
      std::vector<Formula> kids;
      kids.push_back(random_formula(rng, o, depth - 1));
      kids.push_back(random_formula(rng, o, depth - 1));
      return Formula::conj(std::move(kids));
    }
    case 5: {
      std::vector<Formula> kids;
      kids.push_back(random_formula(rng, o, depth - 1));
      kids.push_back(random_formula(rng, o, depth - 1));
      return Formula::disj(std::move(kids));
    }
    case 6:
      if (o.allow_not)
        return Formula::negation(random_formula(rng, o, depth - 1));
      [[fallthrough]];
    default: {
      double a, b;
      window(a, b);
      return Formula::until(a, b, random_formula(rng, o, depth - 1),
                            random_formula(rng, o, depth - 1));
    }
  }
}

inline Formula random_formula(Rng& rng, const FormulaGenOptions& o) {
  return random_formula(rng, o, o.max_depth);
}

// --- trajectories -----------------------------------------------------------

// Piecewise-linear tracks with vertices on the 0.5 s lattice and dyadic
// positions; with lattice-aligned windows, extrema of affine predicates land
// on lattice instants and grid oracles become exact.
inline Trajectory random_lattice_trajectory(Rng& rng, int nrobots, int dim,
                                            double t_end) {
  Trajectory tr;
  for (RobotId r = 1; r <= nrobots; ++r) {
    std::vector<Vertex>& vs = tr.tracks[r];
    double t = 0.0;
    while (true) {
      Vertex v;
      v.t = t;
      for (int k = 0; k < dim; ++k) v.x.push_back(quarter_units(rng, -24, 24));
      vs.push_back(std::move(v));
      if (t >= t_end) break;
      t = std::min(t_end, t + 0.5 + half_units(rng, 6));
    }
  }
  return tr;
}

// --- validity-domain oracle --------------------------------------------------

// Direct recursion over the raw operator chain. Consecutive same-kind
// operators form one run with the summed window (the composed operator), and
// an eventually run reads the t*/T* state recorded under its outermost node
// id. Written without merge_chain on purpose.
struct OracleVd {
  double lo = 0.0, hi = 0.0;
  bool f_sampled = false;
};

inline OracleVd vd_oracle(const Path& p, const EventuallyState& ev, double th_phi) {
  const auto& ops = p.chain;
  if (ops.empty()) return {0.0, th_phi, false};

  std::function<std::pair<double, double>(size_t)> rec =
      [&](size_t i) -> std::pair<double, double> {
    if (i == ops.size()) return {0.0, 0.0};
    size_t j = i;
    double A = 0.0, B = 0.0;
    while (j < ops.size() && ops[j].eventually == ops[i].eventually) {
      A += ops[j].a;
      B += ops[j].b;
      ++j;
    }
    if (!ops[i].eventually) {
      if (j == ops.size()) return {A, B};  // covered window of the leaf run
      auto [clo, chi] = rec(j);
      return {A + clo, A + chi};  // interior always anchors at its lower edge
    }
    EvNodeState st = ev.get(ops[i].node_id);
    double blo, bhi;
    if (st.T_star) {
      blo = bhi = st.t_star + *st.T_star;
    } else {
      blo = st.t_star + A;
      bhi = st.t_star + B;
    }
    auto [clo, chi] = rec(j);
    return {blo + clo, bhi + chi};
  };

  auto [lo, hi] = rec(0);
  return {lo, hi, ops.back().eventually};
}

// --- grid monitor oracle ------------------------------------------------------

// Quantitative semantics evaluated on a fixed uniform grid joined with the
// trace vertex times. No closed forms, no memoization: the slow obvious
// implementation.
class GridMonitor {
public:
  GridMonitor(const Trajectory& tr, double t_end, double dt) {
    for (const auto& [r, vs] : tr.tracks) {
      tracks_.add(r, vs);
      for (const Vertex& v : vs) grid_.push_back(v.t);
    }
    for (double t = 0.0; t <= t_end + 1e-9; t += dt) grid_.push_back(t);
    grid_.push_back(t_end);
    std::sort(grid_.begin(), grid_.end());
    grid_.erase(std::unique(grid_.begin(), grid_.end()), grid_.end());
  }

  double rho(const Formula& f, double t) const {
    switch (f.kind) {
      case FKind::True:
        return 1e300;
      case FKind::Pred:
        return rho_at(f.pred->h, tracks_, f.pred->owners, t);
      case FKind::Not:
        return -rho(f.kids[0], t);
      case FKind::And: {
        double m = 1e300;
        for (const Formula& k : f.kids) m = std::min(m, rho(k, t));
        return m;
      }
      case FKind::Or: {
        double m = -1e300;
        for (const Formula& k : f.kids) m = std::max(m, rho(k, t));
        return m;
      }
      case FKind::Always: {
        double m = 1e300;
        for (double g : grid_)
          if (g >= t + f.a - 1e-9 && g <= t + f.b + 1e-9)
            m = std::min(m, rho(f.kids[0], g));
        return m;
      }
      case FKind::Eventually: {
        double m = -1e300;
        for (double g : grid_)
          if (g >= t + f.a - 1e-9 && g <= t + f.b + 1e-9)
            m = std::max(m, rho(f.kids[0], g));
        return m;
      }
      case FKind::Until: {
        double best = -1e300;
        double run_min = rho(f.kids[0], t);
        for (double g : grid_) {
          if (g < t - 1e-9) continue;
          if (g > t + f.b + 1e-9) break;
          run_min = std::min(run_min, rho(f.kids[0], g));
          if (g >= t + f.a - 1e-9)
            best = std::max(best, std::min(rho(f.kids[1], g), run_min));
        }
        return best;
      }
    }
    return -1e300;
  }

private:
  JointTracks tracks_;
  std::vector<double> grid_;
};

}  // namespace testutil
