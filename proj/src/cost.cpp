#include "stlplan/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stlplan {

double eval_h(const Predicate& p, const JointState& s) {
  return eval(p.h, s).as_scalar();
}

double hinge_cost(const Predicate& p, const JointState& s) {
  double h = eval_h(p, s);
  // a NaN h (e.g. inf - inf in a coupled term) must read as infeasible, not
  // as zero cost, or the splice gate would wave the point through
  if (std::isnan(h)) return std::numeric_limits<double>::infinity();
  h = std::max(0.0, h);
  return 0.5 * h * h;
}

double assemble_cost(std::span<const ActiveTerm> terms, const JointState& s) {
  double total = 0.0;
  for (const ActiveTerm& t : terms) {
    if (t.lambda == 0.0) continue;
    total += t.lambda * hinge_cost(*t.pred, s);
  }
  return total;
}

void assemble_gradient(std::span<const ActiveTerm> terms, const JointState& s,
                       RobotId robot, std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<double> g(grad.size());
  for (const ActiveTerm& t : terms) {
    if (t.lambda == 0.0) continue;
    double h = eval_h(*t.pred, s);
    if (h <= 0.0) continue;  // hinge inactive, term contributes nothing
    eval_gradient(t.pred->h, s, robot, g);
    for (size_t k = 0; k < grad.size(); ++k) grad[k] += t.lambda * h * g[k];
  }
}

void assemble_gradient_fd(std::span<const ActiveTerm> terms, const JointState& s,
                          RobotId robot, std::span<double> grad, double eps) {
  JointState probe = s;
  std::vector<double> x(probe.get(robot).begin(), probe.get(robot).end());
  for (size_t k = 0; k < grad.size(); ++k) {
    double keep = x[k];
    x[k] = keep + eps;
    probe.set(robot, x);
    double up = assemble_cost(terms, probe);
    x[k] = keep - eps;
    probe.set(robot, x);
    double dn = assemble_cost(terms, probe);
    x[k] = keep;
    probe.set(robot, x);
    grad[k] = (up - dn) / (2.0 * eps);
  }
}

}  // namespace stlplan
