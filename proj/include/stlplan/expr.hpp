#pragma once

// Predicate expression trees. A predicate is written h(x, t) <= 0 where h is
// built from robot states x<i> (vectors), component accesses x<i>[k], the time
// variable t, literals, arithmetic, and a small function set. Values are
// scalars or short vectors; comparisons must reduce to scalars, which is
// enforced when a formula is validated against robot dimensions.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stlplan {

using RobotId = int;  // as written in formulas: x1, x2, ...

constexpr int kMaxDim = 8;

// Scalar-or-vector value used during evaluation.
struct Value {
  int n = 1;  // 1 with scalar flag unset means true scalar
  bool vector = false;
  std::array<double, kMaxDim> v{};

  static Value scalar(double s) {
    Value x;
    x.n = 1;
    x.vector = false;
    x.v[0] = s;
    return x;
  }
  double as_scalar() const {
    if (vector && n != 1) throw std::logic_error("vector value used as scalar");
    return v[0];
  }
};

enum class ExprKind {
  Const,
  Time,
  State,  // robot id, component (-1 = whole vector)
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Norm,
  Abs,
  Exp,
  Sin,
  Cos,
  Sqrt,
};

struct Expr {
  ExprKind kind = ExprKind::Const;
  double value = 0.0;   // Const
  RobotId robot = 0;    // State
  int component = -1;   // State
  std::vector<Expr> kids;

  static Expr constant(double v);
  static Expr time();
  static Expr state(RobotId r, int component = -1);
  static Expr unary(ExprKind k, Expr e);
  static Expr binary(ExprKind k, Expr a, Expr b);
};

// Joint state snapshot for evaluation: per-robot state spans indexed by id.
class JointState {
public:
  double t = 0.0;

  void set(RobotId r, std::span<const double> x) {
    if (r < 0) throw std::invalid_argument("negative robot id");
    if (static_cast<size_t>(r) >= states_.size()) states_.resize(r + 1);
    states_[r] = x;
  }
  std::span<const double> get(RobotId r) const {
    if (r < 0 || static_cast<size_t>(r) >= states_.size() || states_[r].empty())
      throw std::out_of_range("no state bound for robot " + std::to_string(r));
    return states_[r];
  }
  bool has(RobotId r) const {
    return r >= 0 && static_cast<size_t>(r) < states_.size() && !states_[r].empty();
  }

private:
  std::vector<std::span<const double>> states_;
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Evaluate the expression at the given joint state.
Value eval(const Expr& e, const JointState& s);

// Accumulate d(e)/d(x_robot[k]) into grad (size = dim of robot). The expression
// must be scalar-valued. Gradients through norm at the origin are defined as 0.
void eval_gradient(const Expr& e, const JointState& s, RobotId robot, std::span<double> grad);

// Robots referenced by the expression, sorted ascending, deduplicated.
std::vector<RobotId> referenced_robots(const Expr& e);

// Shortest decimal form that parses back to exactly the same double.
std::string print_double(double v);

// Canonical text form; parse(print(e)) reproduces the tree.
std::string print_expr(const Expr& e);

// Structural equality.
bool expr_equal(const Expr& a, const Expr& b);

// Stable content hash of the canonical form.
std::uint64_t expr_hash(const Expr& e);

// Validates shapes against robot dimensions (robot id -> dim); returns the
// value width of the expression (1 for scalar) or throws EvalError.
int check_shape(const Expr& e, const std::vector<int>& dims);

}  // namespace stlplan
