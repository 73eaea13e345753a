#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stlplan/formula.hpp"
#include "stlplan/rng.hpp"
#include "stlplan/validity.hpp"
#include "oracles.hpp"

using namespace stlplan;

namespace {

Path only_path(const std::string& text) {
  Formula f = to_pnf(parse_formula(text));
  auto paths = enumerate_paths(f);
  REQUIRE(paths.size() == 1);
  return paths[0];
}

// Populates t*/T* for every eventually run of the path with values inside the
// run's composed window, mirroring the merge rule independently of merge_chain.
void randomize_ev(Rng& rng, const Path& p, EventuallyState& ev, bool pin_only) {
  size_t i = 0;
  const auto& ops = p.chain;
  while (i < ops.size()) {
    size_t j = i;
    double A = 0.0, B = 0.0;
    while (j < ops.size() && ops[j].eventually == ops[i].eventually) {
      A += ops[j].a;
      B += ops[j].b;
      ++j;
    }
    if (ops[i].eventually) {
      EvNodeState& st = ev.at(ops[i].node_id);
      size_t steps = static_cast<size_t>((B - A) * 4.0) + 1;
      if (!pin_only && rng.u01() < 0.5)
        st.t_star = A + 0.25 * static_cast<double>(rng.pick(steps));
      if (rng.u01() < 0.5)
        st.T_star = A + 0.25 * static_cast<double>(rng.pick(steps));
    }
    i = j;
  }
}

}  // namespace

TEST_CASE("window of a leaf always") {
  Path p = only_path("G[5,10](x1 <= 0)");
  EventuallyState ev;
  ValidityDomain d = compute_vd(p, ev, time_horizon(parse_formula("G[5,10](x1 <= 0)")));
  CHECK(d.lo == 5.0);
  CHECK(d.hi == 10.0);
  CHECK(d.kind == VdKind::GCovered);
}

TEST_CASE("pinned eventually over always covers the anchored window") {
  Path p = only_path("F[5,10]G[0,2](x1 <= 0)");
  EventuallyState ev;
  ev.at(p.chain[0].node_id).T_star = 7.0;
  ValidityDomain d = compute_vd(p, ev, 12.0);
  CHECK(d.lo == 7.0);
  CHECK(d.hi == 9.0);
  CHECK(d.kind == VdKind::GCovered);
}

TEST_CASE("pinned eventually under always is a point") {
  Path p = only_path("G[2,10]F[0,5](x1 <= 0)");
  EventuallyState ev;
  ev.at(p.chain[1].node_id).T_star = 1.0;
  ValidityDomain d = compute_vd(p, ev, 15.0);
  CHECK(d.lo == 3.0);
  CHECK(d.hi == 3.0);
  CHECK(d.point());
  CHECK(d.kind == VdKind::FSampled);
}

TEST_CASE("nested always operators compose into one window") {
  Path p = only_path("G[1,10]G[0,2](x1 <= 0)");
  EventuallyState ev;
  ValidityDomain d = compute_vd(p, ev, 12.0);
  CHECK(d.lo == 1.0);
  CHECK(d.hi == 12.0);
  CHECK(d.kind == VdKind::GCovered);
  auto chain = merge_chain(p);
  REQUIRE(chain.size() == 1);
  CHECK(chain[0].a == 1.0);
  CHECK(chain[0].b == 12.0);
  CHECK(chain[0].absorbed_ids.size() == 1);
}

TEST_CASE("bare predicate is active over the whole horizon") {
  Formula f = to_pnf(parse_formula("x1 - 1 <= 0 && G[0,80](x1 <= 9)"));
  auto paths = enumerate_paths(f);
  REQUIRE(paths.size() == 2);
  REQUIRE(paths[0].chain.empty());
  EventuallyState ev;
  ValidityDomain d = compute_vd(paths[0], ev, time_horizon(f));
  CHECK(d.lo == 0.0);
  CHECK(d.hi == 80.0);
  CHECK(d.kind == VdKind::GCovered);
}

TEST_CASE("unpinned eventually reports its sampling window") {
  Path p = only_path("F[40,60](x1 <= 0)");
  EventuallyState ev;
  ValidityDomain d = compute_vd(p, ev, 60.0);
  CHECK(d.lo == 40.0);
  CHECK(d.hi == 60.0);
  CHECK(d.kind == VdKind::FSampled);
  // a recorded instant re-anchors the window
  ev.at(p.chain[0].node_id).t_star = 35.0;
  d = compute_vd(p, ev, 60.0);
  CHECK(d.lo == 75.0);
  CHECK(d.hi == 95.0);
}

TEST_CASE("recurring window slides with the recorded anchor") {
  Path p = only_path("G[0,100]F[0,20](x1 <= 0)");
  EventuallyState ev;
  ev.at(p.chain[1].node_id).t_star = 35.0;
  ValidityDomain d = compute_vd(p, ev, 120.0);
  CHECK(d.lo == 35.0);
  CHECK(d.hi == 55.0);
  CHECK(d.kind == VdKind::FSampled);
}

TEST_CASE("recording stores the instant") {
  Path p = only_path("F[5,10](x1 <= 0)");
  EventuallyState ev;
  record_eventually(p, 0, 7.0, ev);
  CHECK(ev.get(p.chain[0].node_id).t_star == 7.0);
  CHECK(!ev.get(p.chain[0].node_id).T_star.has_value());
}

TEST_CASE("recording twice keeps the last instance") {
  Path p = only_path("F[5,10](x1 <= 0)");
  EventuallyState ev;
  record_eventually(p, 0, 7.0, ev);
  record_eventually(p, 0, 8.0, ev);
  CHECK(ev.get(p.chain[0].node_id).t_star == 8.0);
}

TEST_CASE("recording outside the window is rejected") {
  Path p = only_path("F[5,10](x1 <= 0)");
  EventuallyState ev;
  CHECK_THROWS(record_eventually(p, 0, 12.0, ev));
  CHECK(ev.get(p.chain[0].node_id).t_star == 0.0);
}

TEST_CASE("recording accounts for the chain prefix") {
  // under G[2,10], the inner F[0,5] sees instants shifted by the anchor 2
  Path p = only_path("G[2,10]F[0,5](x1 <= 0)");
  EventuallyState ev;
  record_eventually(p, 1, 3.0, ev);
  CHECK(ev.get(p.chain[1].node_id).t_star == 1.0);
}

TEST_CASE("reset clears every eventually on the path") {
  Path p = only_path("F[0,10]F[0,5](x1 <= 0)");
  EventuallyState ev;
  ev.at(p.chain[0].node_id).t_star = 3.0;
  ev.at(p.chain[0].node_id).T_star = 4.0;
  reset_path_eventually(p, ev);
  CHECK(ev.get(p.chain[0].node_id).t_star == 0.0);
  CHECK(!ev.get(p.chain[0].node_id).T_star.has_value());
  // idempotent
  reset_path_eventually(p, ev);
  CHECK(ev.get(p.chain[0].node_id).t_star == 0.0);
}

TEST_CASE("reset over all paths leaves no state behind") {
  Formula f = to_pnf(parse_formula("F[0,10](x1 <= 0) && G[0,5]F[0,5](x1 >= 1)"));
  auto paths = enumerate_paths(f);
  EventuallyState ev;
  for (const Path& p : paths)
    for (const TemporalOp& op : p.chain)
      if (op.eventually) ev.at(op.node_id).t_star = 2.0;
  reset_eventually_all(paths, ev);
  for (const Path& p : paths)
    for (const TemporalOp& op : p.chain) {
      CHECK(ev.get(op.node_id).t_star == 0.0);
      CHECK(!ev.get(op.node_id).T_star.has_value());
    }
}

TEST_CASE("domains match an independent recursion on random formulas") {
  Rng rng(RngKey(31).with("vd-fuzz"));
  testutil::FormulaGenOptions o;
  o.max_depth = 3;
  o.nrobots = 3;
  int formulas = 0, checked = 0;
  while (formulas < 1000) {
    Formula f = to_pnf(testutil::random_formula(rng, o));
    ++formulas;
    double th = time_horizon(f);
    for (const Path& p : enumerate_paths(f)) {
      EventuallyState ev;
      randomize_ev(rng, p, ev, false);
      ValidityDomain got = compute_vd(p, ev, th);
      testutil::OracleVd want = testutil::vd_oracle(p, ev, th);
      CAPTURE(print_formula(f));
      CHECK(got.lo == want.lo);
      CHECK(got.hi == want.hi);
      CHECK((got.kind == VdKind::FSampled) == want.f_sampled);
      ++checked;
    }
  }
  CHECK(checked >= 1000);
}

TEST_CASE("fresh and predrawn domains stay inside the horizon") {
  Rng rng(RngKey(31).with("vd-bounds"));
  testutil::FormulaGenOptions o;
  o.max_depth = 3;
  for (int i = 0; i < 500; ++i) {
    Formula f = to_pnf(testutil::random_formula(rng, o));
    double th = time_horizon(f);
    for (const Path& p : enumerate_paths(f)) {
      EventuallyState ev;
      randomize_ev(rng, p, ev, /*pin_only=*/true);  // t* stays 0, T* in window
      ValidityDomain d = compute_vd(p, ev, th);
      CAPTURE(print_formula(f));
      CHECK(d.lo >= -1e-9);
      CHECK(d.hi <= th + 1e-9);
      CHECK(d.lo <= d.hi + 1e-9);
    }
  }
}

TEST_CASE("kind follows the governing operator") {
  CHECK(compute_vd(only_path("F[0,5](x1 <= 0)"), EventuallyState{}, 5.0).kind ==
        VdKind::FSampled);
  CHECK(compute_vd(only_path("G[0,5](x1 <= 0)"), EventuallyState{}, 5.0).kind ==
        VdKind::GCovered);
  CHECK(compute_vd(only_path("F[0,5]G[0,2](x1 <= 0)"), EventuallyState{}, 7.0).kind ==
        VdKind::GCovered);
  CHECK(compute_vd(only_path("G[0,5]F[0,2](x1 <= 0)"), EventuallyState{}, 7.0).kind ==
        VdKind::FSampled);
  // merged runs take the kind of the whole run
  CHECK(compute_vd(only_path("G[0,5]F[0,2]F[0,1](x1 <= 0)"), EventuallyState{}, 8.0)
            .kind == VdKind::FSampled);
}
