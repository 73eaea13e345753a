#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stlplan/formula.hpp"
#include "stlplan/monitor.hpp"
#include "stlplan/rng.hpp"
#include "oracles.hpp"

using namespace stlplan;

namespace {

bool pnf_is_not_free(const Formula& f) {
  if (f.kind == FKind::Not) return false;
  for (const Formula& k : f.kids)
    if (!pnf_is_not_free(k)) return false;
  return true;
}

int count_leaves(const Formula& f) {
  if (f.kind == FKind::Pred) return 1;
  int n = 0;
  for (const Formula& k : f.kids) n += count_leaves(k);
  return n;
}

}  // namespace

TEST_CASE("basic always parses into the expected shape") {
  Formula f = parse_formula("G[5,10](x1 - 3 <= 0)");
  REQUIRE(f.kind == FKind::Always);
  CHECK(f.a == 5.0);
  CHECK(f.b == 10.0);
  REQUIRE(f.kids.size() == 1);
  REQUIRE(f.kids[0].kind == FKind::Pred);
  CHECK(f.kids[0].pred->text == "x1 - 3 <= 0");
}

TEST_CASE("meeting formula parses as eventually over a conjunction") {
  Formula f = parse_formula("F[40,60](norm(x1 - x3) <= 1 && norm(x2 - x4) <= 1)");
  REQUIRE(f.kind == FKind::Eventually);
  CHECK(f.a == 40.0);
  CHECK(f.b == 60.0);
  REQUIRE(f.kids.size() == 1);
  REQUIRE(f.kids[0].kind == FKind::And);
  CHECK(f.kids[0].kids.size() == 2);
}

TEST_CASE("interval errors are rejected") {
  CHECK_THROWS_AS(parse_formula("G[10,5](x1 <= 0)"), ParseError);
  CHECK_THROWS_AS(parse_formula("F[-1,5](x1 <= 0)"), ParseError);
  CHECK_THROWS_AS(parse_formula("G[3,](x1 <= 0)"), ParseError);
}

TEST_CASE("syntax errors carry position info") {
  try {
    parse_formula("G[0,5](x1 <= )");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line >= 1);
    CHECK(e.col > 1);
  }
}

TEST_CASE("strict comparisons collapse to non-strict") {
  Formula a = parse_formula("x1 < 3");
  Formula b = parse_formula("x1 <= 3");
  CHECK(formula_equal(a, b));
  CHECK(formula_equal(parse_formula("x1 > 3"), parse_formula("x1 >= 3")));
}

TEST_CASE("negated leaf flips the inequality") {
  Formula f = to_pnf(parse_formula("!(x1 - 3 <= 0)"));
  REQUIRE(f.kind == FKind::Pred);
  // -h <= 0, i.e. 3 - x1 <= 0
  double x[1] = {5};
  JointState s;
  s.set(1, x);
  CHECK(eval(f.pred->h, s).as_scalar() == doctest::Approx(-2.0));
}

TEST_CASE("negation dualizes always into eventually") {
  Formula f = to_pnf(parse_formula("!G[2,4](x1 <= 0)"));
  REQUIRE(f.kind == FKind::Eventually);
  CHECK(f.a == 2.0);
  CHECK(f.b == 4.0);
  CHECK(f.kids[0].kind == FKind::Pred);
}

TEST_CASE("negated conjunction becomes a disjunction of duals") {
  Formula f = to_pnf(parse_formula("!(x1 <= 1 && G[0,2](x1 <= 2))"));
  REQUIRE(f.kind == FKind::Or);
  REQUIRE(f.kids.size() == 2);
  CHECK(f.kids[0].kind == FKind::Pred);
  REQUIRE(f.kids[1].kind == FKind::Eventually);
  CHECK(f.kids[1].a == 0.0);
  CHECK(f.kids[1].b == 2.0);
}

TEST_CASE("negated until is rejected") {
  Formula f = parse_formula("!((x1 <= 1) U[0,5] (x1 >= 2))");
  CHECK_THROWS_AS(to_pnf(f), UnsupportedTransform);
}

TEST_CASE("pnf is not-free and idempotent") {
  Rng rng(RngKey(11).with("pnf"));
  testutil::FormulaGenOptions o;
  o.max_depth = 4;
  for (int i = 0; i < 500; ++i) {
    Formula f = testutil::random_formula(rng, o);
    Formula p = to_pnf(f);
    CHECK(pnf_is_not_free(p));
    CHECK(formula_equal(p, to_pnf(p)));
  }
}

TEST_CASE("pnf preserves the robustness sign") {
  Rng rng(RngKey(11).with("pnf-sign"));
  testutil::FormulaGenOptions o;
  o.max_depth = 4;
  o.max_window_halves = 8;
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    Formula f = testutil::random_formula(rng, o);
    Formula p = to_pnf(f);
    double th = time_horizon(f);
    Trajectory tr = testutil::random_lattice_trajectory(rng, o.nrobots, o.dim, th + 1.0);
    MonitorOptions opt;
    opt.dt = 0.25;
    double r1 = robustness(f, tr, 0.0, opt);
    double r2 = robustness(p, tr, 0.0, opt);
    if (std::abs(r1) <= 1e-9) continue;
    ++checked;
    CAPTURE(print_formula(f));
    CHECK((r1 > 0) == (r2 > 0));
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-9));
  }
  CHECK(checked > 800);
}

TEST_CASE("time horizon of the basic shapes") {
  CHECK(time_horizon(parse_formula("x1 <= 0")) == 0.0);
  CHECK(time_horizon(parse_formula("G[20,80](x1 <= 0)")) == 80.0);
  CHECK(time_horizon(parse_formula("F[5,10]G[0,2](x1 <= 0)")) == 12.0);
  CHECK(time_horizon(parse_formula("(x1 <= 1) U[3,7] (x1 >= 2)")) == 7.0);
}

TEST_CASE("conjunction horizon is the max of the parts") {
  Rng rng(RngKey(11).with("th-max"));
  testutil::FormulaGenOptions o;
  for (int i = 0; i < 300; ++i) {
    Formula f1 = testutil::random_formula(rng, o);
    Formula f2 = testutil::random_formula(rng, o);
    double expect = std::max(time_horizon(f1), time_horizon(f2));
    std::vector<Formula> kids;
    kids.push_back(f1);
    kids.push_back(f2);
    CHECK(time_horizon(Formula::conj(std::move(kids))) == expect);
  }
}

TEST_CASE("parse print round-trip") {
  Rng rng(RngKey(11).with("roundtrip"));
  testutil::FormulaGenOptions o;
  o.max_depth = 4;
  o.allow_until = true;
  for (int i = 0; i < 500; ++i) {
    Formula f = testutil::random_formula(rng, o);
    std::string text = print_formula(f);
    CAPTURE(text);
    Formula back = parse_formula(text);
    CHECK(formula_equal(f, back));
    CHECK(print_formula(back) == text);
  }
}

TEST_CASE("four chains of a mixed conjunction") {
  // one eventually leaf, eventually-over-always, always-over-eventually,
  // and a plain always leaf
  Formula f = to_pnf(parse_formula(
      "F[0,8](x1 <= 1) && F[0,8]G[1,2](x1 <= 2) && G[2,10]F[0,5](x1 <= 3) && "
      "G[5,10](x1 <= 4)"));
  auto paths = enumerate_paths(f);
  REQUIRE(paths.size() == 4);
  CHECK(paths[0].chain.size() == 1);
  CHECK(paths[0].chain[0].eventually);
  REQUIRE(paths[1].chain.size() == 2);
  CHECK(paths[1].chain[0].eventually);
  CHECK(!paths[1].chain[1].eventually);
  REQUIRE(paths[2].chain.size() == 2);
  CHECK(!paths[2].chain[0].eventually);
  CHECK(paths[2].chain[1].eventually);
  CHECK(paths[3].chain.size() == 1);
  CHECK(!paths[3].chain[0].eventually);
  // each path addresses its own leaf, left to right
  for (size_t i = 0; i < paths.size(); ++i) CHECK(paths[i].leaf != nullptr);
}

TEST_CASE("single predicate gives one chain of length zero") {
  Formula f = to_pnf(parse_formula("x1 - 1 <= 0"));
  auto paths = enumerate_paths(f);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].chain.empty());
}

TEST_CASE("conjunction of two predicates gives two paths") {
  Formula f = to_pnf(parse_formula("x1 <= 1 && x1 >= 0"));
  auto paths = enumerate_paths(f);
  CHECK(paths.size() == 2);
}

TEST_CASE("path count equals leaf count on random formulas") {
  Rng rng(RngKey(11).with("pathcount"));
  testutil::FormulaGenOptions o;
  o.max_depth = 4;
  for (int i = 0; i < 300; ++i) {
    Formula p = to_pnf(testutil::random_formula(rng, o));
    CHECK(enumerate_paths(p).size() == static_cast<size_t>(count_leaves(p)));
  }
}

TEST_CASE("nested same-kind operators are flagged") {
  Formula f = to_pnf(parse_formula("G[1,10]G[0,2](x1 <= 0)"));
  auto paths = enumerate_paths(f);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].same_op_nested);
  Formula g = to_pnf(parse_formula("G[1,10]F[0,2](x1 <= 0)"));
  CHECK(!enumerate_paths(g)[0].same_op_nested);
}

TEST_CASE("satisfaction tree starts all unknown") {
  Formula f = to_pnf(parse_formula("G[0,5](x1 <= 0) && F[0,5](x1 >= 1)"));
  SatisfactionTree st = build_satisfaction_tree(f);
  CHECK(st.tau.size() == static_cast<size_t>(count_nodes(f)));
  for (int8_t v : st.tau) CHECK(v == -1);
  CHECK(st.root() == -1);
}

TEST_CASE("until is parsed but excluded from path enumeration") {
  Formula f = parse_formula("(x1 <= 1) U[0,5] (x1 >= 2)");
  CHECK(f.kind == FKind::Until);
  CHECK_THROWS_AS(enumerate_paths(f), UnsupportedTransform);
}

TEST_CASE("operator precedence binds or weakest then and then until") {
  // a || b && c parses as a || (b && c)
  Formula f = parse_formula("x1 <= 1 || x1 >= 2 && x1 <= 3");
  REQUIRE(f.kind == FKind::Or);
  REQUIRE(f.kids.size() == 2);
  CHECK(f.kids[1].kind == FKind::And);
}
