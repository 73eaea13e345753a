#pragma once

// Cost assembly for gradient descent. Each active path contributes a hinge
// penalty lambda * 1/2 * max(0, h(x))^2, so the cost is zero exactly when
// every active predicate is satisfied (h <= 0) and smooth everywhere.

#include <span>
#include <vector>

#include "stlplan/expr.hpp"
#include "stlplan/formula.hpp"

namespace stlplan {

struct ActiveTerm {
  size_t path_index = 0;
  std::shared_ptr<const Predicate> pred;
  double lambda = 1.0;
};

// h(x) at the joint state; throws EvalError if the expression is not scalar.
double eval_h(const Predicate& p, const JointState& s);

// 1/2 * max(0, h)^2 for one predicate.
double hinge_cost(const Predicate& p, const JointState& s);

// Sum of lambda-weighted hinge costs. The caller passes the terms relevant to
// one robot; the value is shared by every robot the predicates couple.
double assemble_cost(std::span<const ActiveTerm> terms, const JointState& s);

// d/dx_i of assemble_cost: sum of lambda * max(0, h) * grad_{x_i} h. grad must
// have the robot's dimension.
void assemble_gradient(std::span<const ActiveTerm> terms, const JointState& s,
                       RobotId robot, std::span<double> grad);

// Central-difference gradient of the same cost, used as an oracle in tests.
void assemble_gradient_fd(std::span<const ActiveTerm> terms, const JointState& s,
                          RobotId robot, std::span<double> grad,
                          double eps = 1e-6);

}  // namespace stlplan
