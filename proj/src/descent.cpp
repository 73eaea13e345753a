#include "stlplan/descent.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace stlplan {

DescentRun::DescentRun(RobotId robot, std::vector<double> z0, DescentParams params,
                       RngKey key)
    : robot_(robot), z_(std::move(z0)), p_(std::move(params)), key_(key) {
  if (!p_.box_lo.empty() && p_.box_lo.size() != z_.size())
    throw std::invalid_argument("descent: box dimension mismatch");
}

DescentStatus DescentRun::step(std::span<const ActiveTerm> terms,
                               const JointState& others) {
  if (finished_) return restarted_ ? DescentStatus::Restarted : DescentStatus::Converged;

  JointState view = others;
  view.set(robot_, z_);
  last_cost_ = assemble_cost(terms, view);
  if (last_cost_ <= p_.threshold) {
    finished_ = true;
    return DescentStatus::Converged;
  }
  if (k_ >= p_.max_iters) {
    if (p_.box_lo.empty())
      throw std::logic_error("descent: iteration cap hit with no restart box");
    Rng rng(key_.with("restart"));
    z_ = rng.box(p_.box_lo, p_.box_hi);
    view.set(robot_, z_);
    last_cost_ = assemble_cost(terms, view);
    finished_ = true;
    restarted_ = true;
    return DescentStatus::Restarted;
  }

  std::vector<double> d(z_.size());
  assemble_gradient(terms, view, robot_, d);
  double n2 = 0.0;
  for (double v : d) n2 += v * v;
  double n = std::sqrt(n2);
  if (n == 0.0) {
    // positive cost but flat gradient (e.g. exactly on a norm's center):
    // nudge the iterate off the degenerate point
    Rng rng(key_.with("jitter").with(static_cast<std::uint64_t>(k_)));
    for (double& v : z_) v += p_.jitter * rng.uniform(-1.0, 1.0);
  } else {
    double scale = (n >= 1.0) ? p_.delta : p_.delta / n;
    for (size_t i = 0; i < z_.size(); ++i) z_[i] -= scale * d[i];
  }
  // keep iterates inside the workspace; steep penalties (and coupled terms
  // fed by a neighbour's wild candidate) would otherwise run off to infinity
  if (!p_.box_lo.empty()) {
    for (size_t i = 0; i < z_.size(); ++i) {
      if (!(z_[i] >= p_.box_lo[i])) z_[i] = p_.box_lo[i];
      if (!(z_[i] <= p_.box_hi[i])) z_[i] = p_.box_hi[i];
    }
  }
  ++k_;
  return DescentStatus::Active;
}

DescentResult distributed_optimisation(RobotId robot, std::vector<double> z0,
                                       std::span<const ActiveTerm> terms,
                                       const JointState& others,
                                       const DescentParams& params,
                                       const RngKey& key) {
  DescentRun run(robot, std::move(z0), params, key);
  while (run.step(terms, others) == DescentStatus::Active) {
  }
  DescentResult r;
  r.z = run.z();
  r.cost = run.last_cost();
  r.iterations = run.iterations();
  r.restarted = run.restarted();
  r.converged = !run.restarted() && run.finished();
  return r;
}

}  // namespace stlplan
