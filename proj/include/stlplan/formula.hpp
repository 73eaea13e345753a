#pragma once

// STL formula AST and operations: parsing, positive normal form, time horizon,
// path enumeration, and the satisfaction tree used by the planner.
//
// Grammar (one-token lookahead, recursive descent):
//   formula := or ;  or := and ("||" and)* ;  and := until ("&&" until)*
//   until   := unary ("U" "[" num "," num "]" unary)?
//   unary   := "!" unary | ("G"|"F") "[" num "," num "]" unary | "(" formula ")" | comparison
//   comparison := expr ("<="|">="|"<"|">") expr      (strictness collapses)
// Comparisons normalize to h <= 0: e1 <= e2 stores h = e1 - e2, e1 >= e2
// stores h = e2 - e1.

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "stlplan/expr.hpp"

namespace stlplan {

struct Predicate {
  Expr h;                        // satisfied iff h(x, t) <= 0
  std::vector<RobotId> owners;   // sorted; size 1 or 2 enforced at scenario load
  std::string text;              // canonical print of the comparison
  std::uint64_t id = 0;          // stable content hash, order-independent

  static Predicate make(Expr h);
};

enum class FKind { True, Pred, Not, And, Or, Always, Eventually, Until };

struct Formula {
  FKind kind = FKind::True;
  double a = 0.0, b = 0.0;  // window of Always/Eventually/Until
  std::shared_ptr<const Predicate> pred;
  std::vector<Formula> kids;

  static Formula truth();
  static Formula predicate(Predicate p);
  static Formula negation(Formula f);
  static Formula conj(std::vector<Formula> fs);
  static Formula disj(std::vector<Formula> fs);
  static Formula always(double a, double b, Formula f);
  static Formula eventually(double a, double b, Formula f);
  static Formula until(double a, double b, Formula lhs, Formula rhs);
};

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) + ", col " +
                           std::to_string(col_) + ")"),
        line(line_), col(col_) {}
};

struct UnsupportedTransform : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Formula parse_formula(const std::string& text);
std::string print_formula(const Formula& f);
bool formula_equal(const Formula& a, const Formula& b);

// Positive normal form: negations pushed to (and absorbed into) predicates,
// double negations removed, G/F duality applied. Until under negation throws
// UnsupportedTransform. !mu rewrites the predicate to -h <= 0 (non-strict
// closure); !true becomes the unsatisfiable predicate 1 <= 0.
Formula to_pnf(const Formula& f);

// Definition: th(mu) = 0, th(!f) = th(f), th(f1 & f2) = max, th(f1 U[a,b] f2)
// = b + max(th(f1), th(f2)), hence th(G/F[a,b] f) = b + th(f).
double time_horizon(const Formula& f);

// Stable preorder node ids over a PNF tree.
int count_nodes(const Formula& f);

struct TemporalOp {
  bool eventually = false;  // false = Always
  double a = 0.0, b = 0.0;
  int node_id = -1;  // preorder index in the PNF tree
};

// One root-to-leaf chain through set nodes (And/Or are transparent).
struct Path {
  std::vector<TemporalOp> chain;           // outermost first
  std::shared_ptr<const Predicate> leaf;
  int leaf_node_id = -1;
  std::vector<int> route;                  // child indices from root (PathId)
  bool same_op_nested = false;             // adjacent same-kind temporal ops (special vd rule)
  std::vector<RobotId> owners;             // leaf owners
};

// All paths of a PNF formula, in deterministic left-to-right order.
// Throws UnsupportedTransform if the formula contains Until (planner-side).
std::vector<Path> enumerate_paths(const Formula& pnf);

// Satisfaction tree: tau per node id, initialized -1 (unknown/unsatisfied).
struct SatisfactionTree {
  std::vector<int8_t> tau;

  int8_t root() const { return tau.empty() ? int8_t{-1} : tau[0]; }
};

SatisfactionTree build_satisfaction_tree(const Formula& pnf);

// Node ids along a path's route (root, each set node, leaf), outermost first.
std::vector<int> path_node_ids(const Formula& pnf, const Path& p);

}  // namespace stlplan
