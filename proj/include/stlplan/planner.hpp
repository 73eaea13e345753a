#pragma once

// Sampling-based trajectory planner. Each robot grows a time-sorted tree of
// waypoints: an iteration samples an instant t0 from the validity domains of
// its unsatisfied paths, descends the active predicates' hinge cost at t0
// against the neighbours' published trajectories, and splices the point into
// the tree only when the cost reached zero, so every spliced waypoint is
// feasible for what it was optimised for. Satisfaction of a path is decided
// by re-checking the path's operator chain against the current trees (window
// extrema along the piecewise-linear interpolation), never by trusting the
// bookkeeping; the eventually-state and coverage frontiers only steer where
// t0 gets sampled next.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "stlplan/formula.hpp"
#include "stlplan/monitor.hpp"
#include "stlplan/rng.hpp"
#include "stlplan/track.hpp"
#include "stlplan/validity.hpp"

namespace stlplan {

struct PlannerParams {
  double delta = 0.1;         // descent step size
  double eta = 0.01;          // threshold of the standalone descent API
  int L = 100;                // instants sampled per attempt
  int Lp = 100;               // descent rounds per instant
  int attempts = 10;          // full restarts (fresh trees and bookkeeping)
  std::uint64_t seed = 1;
  double dt = 0.05;           // grid for robust window checks
  double time_limit_s = 0.0;  // wall clock budget, 0 = unlimited
  bool parallel = true;       // OpenMP over robots; false = serial reference
};

struct RobotSpec {
  RobotId id = 0;
  std::vector<double> x0;
  std::vector<double> lo, hi;  // workspace box: restarts and the free endpoint
};

// Time-sorted waypoint tree (a chain under linear interpolation). Vertices
// are permanent: a vertex pins the trajectory at its instant for good, which
// is what makes verified witnesses immune to later splices.
class RobotTree {
public:
  RobotTree() = default;
  RobotTree(double t_f, std::vector<double> x0, std::vector<double> x_f);

  const std::vector<Vertex>& vertices() const { return v_; }
  std::vector<double> interpolate(double t) const { return interp_vertices(v_, t); }

  // Sorted insert; refuses (returns false) when an existing vertex already
  // pins an instant within 1e-9.
  bool splice(double t, std::vector<double> x);

private:
  std::vector<Vertex> v_;
};

// One formula per choice of disjunct across all Or nodes (PNF input), in
// deterministic order, capped.
std::vector<Formula> branch_formulas(const Formula& pnf, size_t cap = 64);

// Immutable description of one branch: paths, merged chains, ownership maps.
class Mission {
public:
  Mission(Formula branch_pnf, std::vector<RobotSpec> robots, double dt);

  const Formula& formula() const { return f_; }
  double horizon() const { return horizon_; }
  double t_f() const { return horizon_ + 1.0; }
  double dt() const { return dt_; }
  const std::vector<RobotSpec>& robots() const { return robots_; }
  const std::vector<Path>& paths() const { return paths_; }
  const std::vector<MergedOp>& chain(size_t path) const { return chains_[path]; }
  const std::vector<int>& route_ids(size_t path) const { return route_ids_[path]; }
  const std::vector<size_t>& own_paths(RobotId r) const;
  size_t robot_index(RobotId r) const;
  int node_count() const { return node_count_; }

private:
  Formula f_;
  std::vector<RobotSpec> robots_;
  std::vector<Path> paths_;
  std::vector<std::vector<MergedOp>> chains_;
  std::vector<std::vector<int>> route_ids_;
  std::map<RobotId, std::vector<size_t>> own_;
  std::vector<size_t> none_;
  double horizon_ = 0.0;
  double dt_ = 0.05;
  int node_count_ = 0;
};

// Per-robot satisfaction bookkeeping and domain sampling.
class RobotBook {
public:
  RobotBook(const Mission* m, RobotId self);

  const std::vector<size_t>& own_paths() const;
  bool done(size_t path) const { return done_[path]; }
  bool all_done() const;
  ValidityDomain vd(size_t path) const;

  // Draws the shared satisfaction instant of every top-level eventually
  // operator (no always above it) from a robot-independent key, so that all
  // robots, even ones in different communication components, agree on the one
  // instant at which conjuncts under that operator must hold together.
  void predraw(const RngKey& tstar_key);

  struct Sampled {
    double t0 = 0.0;
    std::vector<size_t> active;  // own path indices with lambda = 1
  };
  // Draws t0 from the union of unsatisfied domains and resolves overlapping
  // eventually-sampled domains by one shared keyed pick per operator group.
  // Pinned instants and covered-domain endpoints are zero-measure but must be
  // hit exactly (a covered claim includes its boundary, and the segment
  // running to the free endpoint can cross it), so, until a vertex pins them,
  // they get a keyed half-share of the draws. Empty active set means the
  // robot has nothing left to plan.
  Sampled sample(const RngKey& t0_key, const RngKey& pick_key,
                 const std::vector<Vertex>& vertices) const;

  // Post-splice bookkeeping for one active path: records the instant as the
  // path's witness. No-op unless the predicate really holds at t0 on the
  // spliced trees.
  void note_success(size_t path, double t0, const JointTracks& tracks);

  // Re-decides every own path against the current trees and rebuilds tau.
  // Sibling paths that share one temporal chain are decided jointly (their
  // leaf robustness is folded pointwise before the window fold), so a
  // conjunction under a single operator needs a common satisfying instant.
  // Also re-derives the coverage frontier of every recurring eventually from
  // the trees themselves, which steers future sampling at the next gap.
  void refresh(const JointTracks& tracks, double dt);

  // Robustness of the path's chain claim (G/F nest over its leaf) at t = 0,
  // with a pinned top-level eventually checked at its drawn instant.
  double chain_robustness(size_t path, const JointTracks& tracks, double dt) const;

  const SatisfactionTree& tau() const { return tau_; }
  double witness(size_t path) const;  // NaN when none recorded

  void reset();

private:
  struct Claim {
    double value = -1e300;
    bool pinned = false;          // top-level eventually with a drawn instant
    double pin = 0.0;             // that instant (global time)
    int frontier_node = -1;       // innermost eventually-under-always, if any
    double frontier_t_star = 0.0;
    double worst_t = std::numeric_limits<double>::quiet_NaN();  // covered-domain argmin
  };
  Claim group_claim(const std::vector<size_t>& group, const JointTracks& tracks,
                    double dt) const;

  const Mission* m_;
  RobotId self_;
  SatisfactionTree tau_;
  EventuallyState ev_;
  std::vector<std::vector<size_t>> groups_;  // own paths per chain signature
  std::vector<double> repair_;  // per group: last audit's worst violating instant
  std::map<size_t, double> witness_;
  std::vector<bool> done_;
};

struct PathReport {
  RobotId robot = 0;
  size_t path_index = 0;
  std::string leaf;
  std::vector<int> chain_node_ids;
  bool satisfied = false;
  double witness = std::nan("");
  double vd_lo = 0.0, vd_hi = 0.0;
  bool f_sampled = false;
};

struct PlanResult {
  bool satisfied = false;
  int branch = -1;
  std::string branch_text;
  int attempts_used = 0;
  long iterations = 0;
  long messages = 0;
  double wall_s = 0.0;
  Trajectory trajectory;
  std::vector<PathReport> paths;
  std::string note;
};

// Plans the formula (any supported STL, Until excluded) for the given robots.
PlanResult plan(const Formula& f, const std::vector<RobotSpec>& robots,
                const PlannerParams& params);

}  // namespace stlplan
