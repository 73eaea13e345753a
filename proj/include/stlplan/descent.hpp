#pragma once

// Gradient descent on the hinge cost of a robot's active predicates. The run
// is stepped one gradient round at a time so several robots can descend in
// lockstep while exchanging iterates; a blocking wrapper covers the
// single-robot case.
//
// Step rule: with d the gradient of the cost, move by -delta * d when
// ||d|| >= 1 and by -delta * d / ||d|| otherwise. The unit floor keeps the
// step length at least delta near the feasible boundary, so the iterate
// crosses it and lands strictly inside instead of creeping along a vanishing
// gradient. On a zero gradient with positive cost a tiny random jitter breaks
// the tie. After max_iters rounds the run restarts at a uniform sample of the
// workspace box and ends there, leaving the caller's feasibility gate to
// judge the fresh point.

#include <span>
#include <vector>

#include "stlplan/cost.hpp"
#include "stlplan/rng.hpp"

namespace stlplan {

struct DescentParams {
  double delta = 0.1;      // step size
  double threshold = 0.0;  // loop while cost > threshold
  int max_iters = 100;     // gradient rounds before a random restart
  double jitter = 1e-9;
  std::vector<double> box_lo, box_hi;  // workspace box for restarts
};

enum class DescentStatus { Converged, Active, Restarted };

class DescentRun {
public:
  DescentRun(RobotId robot, std::vector<double> z0, DescentParams params, RngKey key);

  // One gradient round. `others` binds every robot the terms reference except
  // this one; the run binds its own iterate. Returns Converged when the cost
  // is at or below the threshold, Restarted when the iteration cap was hit
  // (the iterate is then the fresh random point), Active otherwise.
  DescentStatus step(std::span<const ActiveTerm> terms, const JointState& others);

  const std::vector<double>& z() const { return z_; }
  bool finished() const { return finished_; }
  int iterations() const { return k_; }
  double last_cost() const { return last_cost_; }
  bool restarted() const { return restarted_; }

private:
  RobotId robot_;
  std::vector<double> z_;
  DescentParams p_;
  RngKey key_;
  int k_ = 0;
  bool finished_ = false;
  bool restarted_ = false;
  double last_cost_ = 0.0;
};

struct DescentResult {
  std::vector<double> z;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  bool restarted = false;
};

// Runs the descent to completion against a fixed view of the other robots.
DescentResult distributed_optimisation(RobotId robot, std::vector<double> z0,
                                       std::span<const ActiveTerm> terms,
                                       const JointState& others,
                                       const DescentParams& params,
                                       const RngKey& key);

}  // namespace stlplan
