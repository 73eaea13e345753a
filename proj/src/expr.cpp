#include "stlplan/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "stlplan/rng.hpp"

namespace stlplan {

Expr Expr::constant(double v) {
  Expr e;
  e.kind = ExprKind::Const;
  e.value = v;
  return e;
}
Expr Expr::time() {
  Expr e;
  e.kind = ExprKind::Time;
  return e;
}
Expr Expr::state(RobotId r, int component) {
  Expr e;
  e.kind = ExprKind::State;
  e.robot = r;
  e.component = component;
  return e;
}
Expr Expr::unary(ExprKind k, Expr a) {
  Expr e;
  e.kind = k;
  e.kids.push_back(std::move(a));
  return e;
}
Expr Expr::binary(ExprKind k, Expr a, Expr b) {
  Expr e;
  e.kind = k;
  e.kids.push_back(std::move(a));
  e.kids.push_back(std::move(b));
  return e;
}

namespace {

Value broadcast_binary(const Value& a, const Value& b, ExprKind k) {
  auto op = [k](double x, double y) {
    switch (k) {
      case ExprKind::Add: return x + y;
      case ExprKind::Sub: return x - y;
      case ExprKind::Mul: return x * y;
      case ExprKind::Div: return x / y;
      default: throw std::logic_error("not a binary arithmetic kind");
    }
  };
  if (!a.vector && !b.vector) return Value::scalar(op(a.v[0], b.v[0]));
  if (k == ExprKind::Mul || k == ExprKind::Div) {
    if (a.vector && b.vector) throw EvalError("vector*vector is not defined");
    if (!a.vector && k == ExprKind::Div) throw EvalError("scalar / vector is not defined");
    // scalar * vector, vector * scalar, vector / scalar
    Value out = a.vector ? a : b;
    for (int i = 0; i < out.n; ++i)
      out.v[i] = a.vector ? op(a.v[i], b.v[0]) : op(a.v[0], b.v[i]);
    return out;
  }
  // Add/Sub: vector (+/-) vector of equal width, or broadcast scalar.
  if (a.vector && b.vector) {
    if (a.n != b.n) throw EvalError("vector width mismatch");
    Value out = a;
    for (int i = 0; i < out.n; ++i) out.v[i] = op(a.v[i], b.v[i]);
    return out;
  }
  Value out = a.vector ? a : b;
  for (int i = 0; i < out.n; ++i)
    out.v[i] = op(a.vector ? a.v[i] : a.v[0], b.vector ? b.v[i] : b.v[0]);
  return out;
}

}  // namespace

Value eval(const Expr& e, const JointState& s) {
  switch (e.kind) {
    case ExprKind::Const: return Value::scalar(e.value);
    case ExprKind::Time: return Value::scalar(s.t);
    case ExprKind::State: {
      auto x = s.get(e.robot);
      if (e.component >= 0) {
        if (e.component >= static_cast<int>(x.size()))
          throw EvalError("component out of range for robot " + std::to_string(e.robot));
        return Value::scalar(x[e.component]);
      }
      // width-1 states act as plain scalars, matching check_shape
      if (x.size() == 1) return Value::scalar(x[0]);
      Value out;
      out.n = static_cast<int>(x.size());
      out.vector = true;
      if (out.n > kMaxDim) throw EvalError("state dimension exceeds limit");
      std::copy(x.begin(), x.end(), out.v.begin());
      return out;
    }
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
      return broadcast_binary(eval(e.kids[0], s), eval(e.kids[1], s), e.kind);
    case ExprKind::Neg: {
      Value a = eval(e.kids[0], s);
      for (int i = 0; i < a.n; ++i) a.v[i] = -a.v[i];
      return a;
    }
    case ExprKind::Norm: {
      Value a = eval(e.kids[0], s);
      double acc = 0;
      for (int i = 0; i < a.n; ++i) acc += a.v[i] * a.v[i];
      return Value::scalar(std::sqrt(acc));
    }
    case ExprKind::Abs: {
      Value a = eval(e.kids[0], s);
      if (a.vector && a.n != 1) throw EvalError("abs expects a scalar; use norm for vectors");
      return Value::scalar(std::fabs(a.v[0]));
    }
    case ExprKind::Exp:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Sqrt: {
      Value a = eval(e.kids[0], s);
      if (a.vector && a.n != 1) throw EvalError("function expects a scalar argument");
      double x = a.v[0];
      switch (e.kind) {
        case ExprKind::Exp: return Value::scalar(std::exp(x));
        case ExprKind::Sin: return Value::scalar(std::sin(x));
        case ExprKind::Cos: return Value::scalar(std::cos(x));
        default:
          if (x < 0) throw EvalError("sqrt of negative value");
          return Value::scalar(std::sqrt(x));
      }
    }
  }
  throw std::logic_error("unreachable expr kind");
}

namespace {

// Reverse-mode accumulation. adj has the same width as the node value.
void backprop(const Expr& e, const JointState& s, RobotId robot, const Value& adj,
              std::span<double> grad) {
  switch (e.kind) {
    case ExprKind::Const:
    case ExprKind::Time:
      return;
    case ExprKind::State: {
      if (e.robot != robot) return;
      if (e.component >= 0) {
        grad[e.component] += adj.v[0];
      } else {
        for (int i = 0; i < adj.n && i < static_cast<int>(grad.size()); ++i) grad[i] += adj.v[i];
      }
      return;
    }
    case ExprKind::Add:
    case ExprKind::Sub: {
      const Value va = eval(e.kids[0], s);
      const Value vb = eval(e.kids[1], s);
      auto spread = [&](const Value& child, const Value& full, double sign, const Expr& node) {
        Value cadj;
        cadj.n = child.n;
        cadj.vector = child.vector;
        if (child.n == full.n) {
          for (int i = 0; i < child.n; ++i) cadj.v[i] = sign * adj.v[i];
        } else {  // scalar broadcast into a vector result: sum the adjoints
          double acc = 0;
          for (int i = 0; i < adj.n; ++i) acc += adj.v[i];
          cadj.v[0] = sign * acc;
        }
        backprop(node, s, robot, cadj, grad);
      };
      Value full = broadcast_binary(va, vb, e.kind);
      spread(va, full, 1.0, e.kids[0]);
      spread(vb, full, e.kind == ExprKind::Sub ? -1.0 : 1.0, e.kids[1]);
      return;
    }
    case ExprKind::Mul: {
      const Value va = eval(e.kids[0], s);
      const Value vb = eval(e.kids[1], s);
      // At most one side is a vector (enforced by eval).
      if (!va.vector && !vb.vector) {
        backprop(e.kids[0], s, robot, Value::scalar(adj.v[0] * vb.v[0]), grad);
        backprop(e.kids[1], s, robot, Value::scalar(adj.v[0] * va.v[0]), grad);
      } else if (va.vector) {
        Value cadj = va;
        for (int i = 0; i < va.n; ++i) cadj.v[i] = adj.v[i] * vb.v[0];
        backprop(e.kids[0], s, robot, cadj, grad);
        double acc = 0;
        for (int i = 0; i < va.n; ++i) acc += adj.v[i] * va.v[i];
        backprop(e.kids[1], s, robot, Value::scalar(acc), grad);
      } else {
        Value cadj = vb;
        for (int i = 0; i < vb.n; ++i) cadj.v[i] = adj.v[i] * va.v[0];
        backprop(e.kids[1], s, robot, cadj, grad);
        double acc = 0;
        for (int i = 0; i < vb.n; ++i) acc += adj.v[i] * vb.v[i];
        backprop(e.kids[0], s, robot, Value::scalar(acc), grad);
      }
      return;
    }
    case ExprKind::Div: {
      const Value va = eval(e.kids[0], s);
      const Value vb = eval(e.kids[1], s);  // scalar (eval rejects vector divisors via scalar/vector rule)
      double inv = 1.0 / vb.v[0];
      Value cadj = va;
      for (int i = 0; i < va.n; ++i) cadj.v[i] = adj.v[i] * inv;
      backprop(e.kids[0], s, robot, cadj, grad);
      double acc = 0;
      for (int i = 0; i < va.n; ++i) acc += adj.v[i] * va.v[i];
      backprop(e.kids[1], s, robot, Value::scalar(-acc * inv * inv), grad);
      return;
    }
    case ExprKind::Neg: {
      Value cadj = adj;
      for (int i = 0; i < cadj.n; ++i) cadj.v[i] = -cadj.v[i];
      backprop(e.kids[0], s, robot, cadj, grad);
      return;
    }
    case ExprKind::Norm: {
      const Value va = eval(e.kids[0], s);
      double norm = 0;
      for (int i = 0; i < va.n; ++i) norm += va.v[i] * va.v[i];
      norm = std::sqrt(norm);
      Value cadj = va;
      if (norm < 1e-300) {
        // Gradient of ||v|| at the origin is defined as 0.
        for (int i = 0; i < cadj.n; ++i) cadj.v[i] = 0.0;
      } else {
        for (int i = 0; i < cadj.n; ++i) cadj.v[i] = adj.v[0] * va.v[i] / norm;
      }
      backprop(e.kids[0], s, robot, cadj, grad);
      return;
    }
    case ExprKind::Abs: {
      const Value va = eval(e.kids[0], s);
      double sign = va.v[0] > 0 ? 1.0 : (va.v[0] < 0 ? -1.0 : 0.0);
      backprop(e.kids[0], s, robot, Value::scalar(adj.v[0] * sign), grad);
      return;
    }
    case ExprKind::Exp: {
      double x = eval(e.kids[0], s).v[0];
      backprop(e.kids[0], s, robot, Value::scalar(adj.v[0] * std::exp(x)), grad);
      return;
    }
    case ExprKind::Sin: {
      double x = eval(e.kids[0], s).v[0];
      backprop(e.kids[0], s, robot, Value::scalar(adj.v[0] * std::cos(x)), grad);
      return;
    }
    case ExprKind::Cos: {
      double x = eval(e.kids[0], s).v[0];
      backprop(e.kids[0], s, robot, Value::scalar(-adj.v[0] * std::sin(x)), grad);
      return;
    }
    case ExprKind::Sqrt: {
      double x = eval(e.kids[0], s).v[0];
      double d = x > 0 ? 0.5 / std::sqrt(x) : 0.0;
      backprop(e.kids[0], s, robot, Value::scalar(adj.v[0] * d), grad);
      return;
    }
  }
}

void collect_robots(const Expr& e, std::vector<RobotId>& out) {
  if (e.kind == ExprKind::State) out.push_back(e.robot);
  for (const auto& k : e.kids) collect_robots(k, out);
}

int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    default: return 4;
  }
}

void print_rec(const Expr& e, std::string& out, int parent_prec) {
  int prec = precedence(e.kind);
  bool paren = prec < parent_prec;
  if (paren) out += '(';
  switch (e.kind) {
    case ExprKind::Const:
      out += print_double(e.value);
      break;
    case ExprKind::Time: out += 't'; break;
    case ExprKind::State:
      out += 'x';
      out += std::to_string(e.robot);
      if (e.component >= 0) {
        out += '[';
        out += std::to_string(e.component);
        out += ']';
      }
      break;
    case ExprKind::Add:
    case ExprKind::Sub:
      print_rec(e.kids[0], out, prec);
      out += e.kind == ExprKind::Add ? " + " : " - ";
      // Right operand of '-' needs the next tier to keep a-(b-c) unambiguous.
      print_rec(e.kids[1], out, prec + (e.kind == ExprKind::Sub ? 1 : 0));
      break;
    case ExprKind::Mul:
    case ExprKind::Div:
      print_rec(e.kids[0], out, prec);
      out += e.kind == ExprKind::Mul ? " * " : " / ";
      print_rec(e.kids[1], out, prec + (e.kind == ExprKind::Div ? 1 : 0));
      break;
    case ExprKind::Neg:
      out += '-';
      print_rec(e.kids[0], out, prec + 1);
      break;
    case ExprKind::Norm:
    case ExprKind::Abs:
    case ExprKind::Exp:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Sqrt: {
      switch (e.kind) {
        case ExprKind::Norm: out += "norm"; break;
        case ExprKind::Abs: out += "abs"; break;
        case ExprKind::Exp: out += "exp"; break;
        case ExprKind::Sin: out += "sin"; break;
        case ExprKind::Cos: out += "cos"; break;
        default: out += "sqrt"; break;
      }
      out += '(';
      print_rec(e.kids[0], out, 0);
      out += ')';
      break;
    }
  }
  if (paren) out += ')';
}

}  // namespace

void eval_gradient(const Expr& e, const JointState& s, RobotId robot, std::span<double> grad) {
  backprop(e, s, robot, Value::scalar(1.0), grad);
}

std::vector<RobotId> referenced_robots(const Expr& e) {
  std::vector<RobotId> out;
  collect_robots(e, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string print_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string print_expr(const Expr& e) {
  std::string out;
  print_rec(e, out, 0);
  return out;
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.kids.size() != b.kids.size()) return false;
  switch (a.kind) {
    case ExprKind::Const:
      if (a.value != b.value) return false;
      break;
    case ExprKind::State:
      if (a.robot != b.robot || a.component != b.component) return false;
      break;
    default: break;
  }
  for (size_t i = 0; i < a.kids.size(); ++i)
    if (!expr_equal(a.kids[i], b.kids[i])) return false;
  return true;
}

std::uint64_t expr_hash(const Expr& e) {
  std::uint64_t h = 0x243f6a8885a308d3ull;
  for (unsigned char c : print_expr(e)) h = splitmix64(h ^ c);
  return h;
}

int check_shape(const Expr& e, const std::vector<int>& dims) {
  switch (e.kind) {
    case ExprKind::Const:
    case ExprKind::Time: return 1;
    case ExprKind::State: {
      if (e.robot < 1 || e.robot >= static_cast<int>(dims.size()) || dims[e.robot] <= 0)
        throw EvalError("formula references undeclared robot x" + std::to_string(e.robot));
      int dim = dims[e.robot];
      if (e.component >= 0) {
        if (e.component >= dim)
          throw EvalError("component x" + std::to_string(e.robot) + "[" +
                          std::to_string(e.component) + "] exceeds robot dimension " +
                          std::to_string(dim));
        return 1;
      }
      return dim;
    }
    case ExprKind::Add:
    case ExprKind::Sub: {
      int a = check_shape(e.kids[0], dims), b = check_shape(e.kids[1], dims);
      if (a != 1 && b != 1 && a != b) throw EvalError("vector width mismatch in + or -");
      return std::max(a, b);
    }
    case ExprKind::Mul: {
      int a = check_shape(e.kids[0], dims), b = check_shape(e.kids[1], dims);
      if (a != 1 && b != 1) throw EvalError("vector*vector is not defined");
      return std::max(a, b);
    }
    case ExprKind::Div: {
      int a = check_shape(e.kids[0], dims), b = check_shape(e.kids[1], dims);
      if (b != 1) throw EvalError("division by a vector is not defined");
      return a;
    }
    case ExprKind::Neg: return check_shape(e.kids[0], dims);
    case ExprKind::Norm: {
      check_shape(e.kids[0], dims);
      return 1;
    }
    case ExprKind::Abs:
    case ExprKind::Exp:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Sqrt: {
      if (check_shape(e.kids[0], dims) != 1)
        throw EvalError("function expects a scalar argument; use norm to reduce vectors");
      return 1;
    }
  }
  throw std::logic_error("unreachable expr kind");
}

}  // namespace stlplan
