#include "stlplan/planner.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <stdexcept>

#include "stlplan/swarm.hpp"

namespace stlplan {

// ── RobotTree ────────────────────────────────────────────────────────────

RobotTree::RobotTree(double t_f, std::vector<double> x0, std::vector<double> x_f) {
  if (t_f <= 0.0) throw std::invalid_argument("tree end time must be positive");
  if (x0.size() != x_f.size()) throw std::invalid_argument("endpoint dimension mismatch");
  v_.push_back({0.0, std::move(x0)});
  v_.push_back({t_f, std::move(x_f)});
}

bool RobotTree::splice(double t, std::vector<double> x) {
  auto it = std::lower_bound(v_.begin(), v_.end(), t,
                             [](const Vertex& v, double tt) { return v.t < tt; });
  if (it != v_.end() && std::abs(it->t - t) < 1e-9) return false;
  if (it != v_.begin() && std::abs((it - 1)->t - t) < 1e-9) return false;
  v_.insert(it, Vertex{t, std::move(x)});
  return true;
}

// ── Branches ─────────────────────────────────────────────────────────────

namespace {

std::vector<Formula> branches_rec(const Formula& f, size_t cap) {
  switch (f.kind) {
    case FKind::True:
    case FKind::Pred:
      return {f};
    case FKind::Or: {
      std::vector<Formula> out;
      for (const Formula& k : f.kids) {
        for (Formula& b : branches_rec(k, cap)) {
          if (out.size() >= cap) return out;
          out.push_back(std::move(b));
        }
      }
      return out;
    }
    case FKind::And: {
      std::vector<std::vector<Formula>> kid_branches;
      for (const Formula& k : f.kids) kid_branches.push_back(branches_rec(k, cap));
      std::vector<Formula> out;
      std::vector<size_t> idx(kid_branches.size(), 0);
      while (out.size() < cap) {
        std::vector<Formula> kids;
        for (size_t i = 0; i < idx.size(); ++i) kids.push_back(kid_branches[i][idx[i]]);
        out.push_back(Formula::conj(std::move(kids)));
        // mixed-radix increment, most significant digit last
        size_t i = 0;
        for (; i < idx.size(); ++i) {
          if (++idx[i] < kid_branches[i].size()) break;
          idx[i] = 0;
        }
        if (i == idx.size()) break;
      }
      return out;
    }
    case FKind::Always:
    case FKind::Eventually: {
      std::vector<Formula> out;
      for (Formula& b : branches_rec(f.kids[0], cap)) {
        out.push_back(f.kind == FKind::Always ? Formula::always(f.a, f.b, std::move(b))
                                              : Formula::eventually(f.a, f.b, std::move(b)));
      }
      return out;
    }
    case FKind::Not:
    case FKind::Until:
      throw UnsupportedTransform("branch enumeration expects PNF without Until");
  }
  throw std::logic_error("unreachable formula kind");
}

}  // namespace

std::vector<Formula> branch_formulas(const Formula& pnf, size_t cap) {
  return branches_rec(pnf, cap);
}

// ── Mission ──────────────────────────────────────────────────────────────

Mission::Mission(Formula branch_pnf, std::vector<RobotSpec> robots, double dt)
    : f_(std::move(branch_pnf)), robots_(std::move(robots)), dt_(dt) {
  horizon_ = time_horizon(f_);
  node_count_ = count_nodes(f_);
  paths_ = enumerate_paths(f_);
  for (size_t i = 0; i < robots_.size(); ++i) {
    const RobotSpec& r = robots_[i];
    if (r.lo.size() != r.x0.size() || r.hi.size() != r.x0.size())
      throw std::invalid_argument("workspace box dimension mismatch for robot x" +
                                  std::to_string(r.id));
    for (size_t j = i + 1; j < robots_.size(); ++j)
      if (robots_[j].id == r.id)
        throw std::invalid_argument("duplicate robot id x" + std::to_string(r.id));
  }
  for (size_t p = 0; p < paths_.size(); ++p) {
    chains_.push_back(merge_chain(paths_[p]));
    route_ids_.push_back(path_node_ids(f_, paths_[p]));
    for (RobotId r : paths_[p].owners) {
      robot_index(r);  // throws if the formula mentions an undeclared robot
      own_[r].push_back(p);
    }
  }

  // An eventually nested under an always asks for one satisfying instant per
  // window anchor. When several predicates sit under such an operator, some
  // robot has to be able to certify that they hold at a common instant, which
  // it can only do for predicates it owns. Top-level eventually operators do
  // not need this: their instant is drawn once from the shared seed.
  std::map<int, std::vector<size_t>> nested_f;
  for (size_t p = 0; p < paths_.size(); ++p) {
    const auto& chain = chains_[p];
    for (size_t k = 1; k < chain.size(); ++k)
      if (chain[k].eventually && !chain[k - 1].eventually)
        nested_f[chain[k].node_id].push_back(p);
  }
  for (const auto& [node, ps] : nested_f) {
    if (ps.size() < 2) continue;
    std::vector<RobotId> common = paths_[ps[0]].owners;
    for (size_t i = 1; i < ps.size() && !common.empty(); ++i) {
      std::vector<RobotId> next;
      for (RobotId r : common)
        for (RobotId o : paths_[ps[i]].owners)
          if (r == o) { next.push_back(r); break; }
      common = std::move(next);
    }
    if (common.empty())
      throw std::invalid_argument(
          "an eventually nested under an always groups predicates with no "
          "shared robot; no robot can certify a common satisfying instant");
  }
}

const std::vector<size_t>& Mission::own_paths(RobotId r) const {
  auto it = own_.find(r);
  return it == own_.end() ? none_ : it->second;
}

size_t Mission::robot_index(RobotId r) const {
  for (size_t i = 0; i < robots_.size(); ++i)
    if (robots_[i].id == r) return i;
  throw std::invalid_argument("formula references robot x" + std::to_string(r) +
                              " which is not in the scenario");
}

// ── RobotBook ────────────────────────────────────────────────────────────

RobotBook::RobotBook(const Mission* m, RobotId self) : m_(m), self_(self) {
  tau_.tau.assign(m_->node_count(), int8_t{-1});
  done_.assign(m_->paths().size(), false);

  std::map<std::vector<int>, std::vector<size_t>> by_chain;
  for (size_t p : own_paths()) {
    std::vector<int> sig;
    for (const MergedOp& op : m_->chain(p)) sig.push_back(op.node_id);
    by_chain[std::move(sig)].push_back(p);
  }
  for (auto& [sig, ps] : by_chain) groups_.push_back(std::move(ps));
  repair_.assign(groups_.size(), std::nan(""));
}

void RobotBook::predraw(const RngKey& tstar_key) {
  for (size_t p : own_paths()) {
    const auto& chain = m_->chain(p);
    if (chain.empty() || !chain[0].eventually) continue;
    EvNodeState& st = ev_.at(chain[0].node_id);
    if (!st.T_star)
      st.T_star = Rng(tstar_key.with(static_cast<std::uint64_t>(chain[0].node_id)))
                      .uniform(chain[0].a, chain[0].b);
  }
}

const std::vector<size_t>& RobotBook::own_paths() const { return m_->own_paths(self_); }

bool RobotBook::all_done() const {
  for (size_t p : own_paths())
    if (!done_[p]) return false;
  return true;
}

ValidityDomain RobotBook::vd(size_t path) const {
  return compute_vd(m_->paths()[path], ev_, m_->horizon());
}

RobotBook::Sampled RobotBook::sample(const RngKey& t0_key, const RngKey& pick_key,
                                     const std::vector<Vertex>& vertices) const {
  struct Seg {
    double lo, hi;
  };
  std::vector<Seg> segs;
  std::vector<double> pts;  // exact instants: pins and covered-domain edges
  for (size_t p : own_paths()) {
    if (done_[p]) continue;
    ValidityDomain d = vd(p);
    double lo = std::max(0.0, d.lo), hi = std::min(m_->horizon(), d.hi);
    if (hi < lo) continue;
    if (hi - lo < 1e-12) {
      pts.push_back(lo);
    } else {
      segs.push_back({lo, hi});
      if (d.kind == VdKind::GCovered) {
        pts.push_back(lo);
        pts.push_back(hi);
      }
    }
  }
  // worst violating instants from the last audit join the exact candidates
  for (double t : repair_)
    if (!std::isnan(t) && t >= 0.0 && t <= m_->horizon()) pts.push_back(t);
  // an existing vertex already pins an instant for good; drop it
  std::erase_if(pts, [&](double t) {
    for (const Vertex& v : vertices)
      if (std::abs(v.t - t) < 1e-9) return true;
    return false;
  });
  Sampled s;
  if (segs.empty() && pts.empty()) return s;

  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-9; }),
            pts.end());
  std::sort(segs.begin(), segs.end(), [](const Seg& a, const Seg& b) { return a.lo < b.lo; });
  std::vector<Seg> merged;
  for (const Seg& g : segs) {
    if (!merged.empty() && g.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, g.hi);
    } else {
      merged.push_back(g);
    }
  }
  double total = 0.0;
  for (const Seg& g : merged) total += g.hi - g.lo;

  // Pinned instants would never be hit by a draw from the continuous part,
  // so they get half the draws whenever both kinds are outstanding.
  Rng rng(t0_key);
  if (!pts.empty() && (merged.empty() || rng.u01() < 0.5)) {
    s.t0 = pts[rng.pick(pts.size())];
  } else {
    double u = rng.u01() * total;
    s.t0 = merged.back().hi;
    for (const Seg& g : merged) {
      double len = g.hi - g.lo;
      if (u <= len) {
        s.t0 = g.lo + u;
        break;
      }
      u -= len;
    }
  }

  for (size_t p : own_paths()) {
    ValidityDomain d = vd(p);
    // Covered domains stay in the gate even when currently satisfied: their
    // predicate must hold at every covered instant, so a vertex spliced here
    // for some other clause must not be allowed to regress them. Sampled
    // eventualities only ever need one witness, so the done ones drop out.
    if (done_[p] && d.kind != VdKind::GCovered) continue;
    if (s.t0 >= d.lo - 1e-9 && s.t0 <= d.hi + 1e-9) s.active.push_back(p);
  }

  // Overlapping eventually-sampled domains: one shared keyed pick per group
  // of paths governed by the same eventually operator, so conjunctions under
  // a common operator stay active together.
  std::vector<int> gids;
  for (size_t p : s.active) {
    const auto& chain = m_->chain(p);
    if (!chain.empty() && chain.back().eventually) {
      int gid = chain.back().node_id;
      if (std::find(gids.begin(), gids.end(), gid) == gids.end()) gids.push_back(gid);
    }
  }
  if (gids.size() >= 2) {
    std::sort(gids.begin(), gids.end());
    RngKey k = pick_key;
    for (int g : gids) k = k.with(static_cast<std::uint64_t>(g));
    int chosen = gids[Rng(k).pick(gids.size())];
    std::vector<size_t> kept;
    for (size_t p : s.active) {
      const auto& chain = m_->chain(p);
      if (!chain.empty() && chain.back().eventually && chain.back().node_id != chosen)
        continue;
      kept.push_back(p);
    }
    s.active = std::move(kept);
  }
  return s;
}

void RobotBook::note_success(size_t path, double t0, const JointTracks& tracks) {
  const Path& pa = m_->paths()[path];
  if (rho_at(pa.leaf->h, tracks, pa.owners, t0) < 0.0) return;
  witness_[path] = t0;
}

namespace {

std::vector<double> sliding_extremum(const std::vector<double>& ts,
                                     const std::vector<double>& vals,
                                     const MergedOp& op) {
  const bool mx = op.eventually;
  const size_t n = ts.size();
  std::vector<double> out(n, mx ? -1e300 : 1e300);
  std::deque<size_t> dq;
  size_t j = 0;
  for (size_t i = 0; i < n; ++i) {
    double wlo = ts[i] + op.a - 1e-9, whi = ts[i] + op.b + 1e-9;
    while (j < n && ts[j] <= whi) {
      while (!dq.empty() &&
             (mx ? vals[dq.back()] <= vals[j] : vals[dq.back()] >= vals[j]))
        dq.pop_back();
      dq.push_back(j);
      ++j;
    }
    while (!dq.empty() && ts[dq.front()] < wlo) dq.pop_front();
    if (!dq.empty()) out[i] = vals[dq.front()];
  }
  return out;
}

}  // namespace

// Joint claim of a group of own paths sharing one merged operator chain.
// The leaves' robustness is folded pointwise (a conjunction under the chain),
// the windows are folded innermost first, and a pinned top-level eventually
// is read off at its drawn instant instead of maximised over its window.
// Also reports the coverage frontier of the innermost eventually-under-always
// so refresh can steer future sampling at the first uncovered window.
RobotBook::Claim RobotBook::group_claim(const std::vector<size_t>& group,
                                        const JointTracks& tracks, double dt) const {
  const auto& chain = m_->chain(group[0]);
  Claim c;

  double span = 0.0;
  for (const MergedOp& op : chain) span += op.b;
  if (chain.empty()) span = m_->horizon();

  std::vector<double> ts;
  for (size_t p : group) {
    const Path& pa = m_->paths()[p];
    auto t1 = sample_times(pa.leaf->h, tracks, pa.owners, 0.0, span, dt,
                           /*force_grid=*/true);
    ts.insert(ts.end(), t1.begin(), t1.end());
  }
  const EvNodeState top = chain.empty() ? EvNodeState{} : ev_.get(chain[0].node_id);
  const bool top_pinned = !chain.empty() && chain[0].eventually && top.T_star.has_value();
  if (top_pinned) {
    c.pinned = true;
    c.pin = top.t_star + *top.T_star;
    ts.push_back(c.pin);
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end(),
                       [](double a, double b) { return std::abs(a - b) < 1e-12; }),
           ts.end());

  std::vector<double> vals(ts.size(), 1e300);
  for (size_t p : group) {
    const Path& pa = m_->paths()[p];
    for (size_t i = 0; i < ts.size(); ++i)
      vals[i] = std::min(vals[i], rho_at(pa.leaf->h, tracks, pa.owners, ts[i]));
  }

  // For covered domains, remember where the raw conjunction is worst. A
  // violation buried inside existing segments is invisible to the splice gate
  // until some draw lands on it, so the sampler gets this instant verbatim.
  if (chain.empty() || !chain.back().eventually) {
    ValidityDomain d = vd(group[0]);
    double lo = std::max(0.0, d.lo), hi = std::min(m_->horizon(), d.hi);
    double worst = 1e300;
    for (size_t i = 0; i < ts.size(); ++i) {
      if (ts[i] < lo - 1e-9 || ts[i] > hi + 1e-9) continue;
      if (vals[i] < worst) {
        worst = vals[i];
        c.worst_t = ts[i];
      }
    }
  }

  if (chain.empty()) {
    // bare predicate: hold throughout the horizon
    double worst = 1e300;
    for (double v : vals) worst = std::min(worst, v);
    c.value = worst;
    return c;
  }

  int recur_k = -1;
  for (size_t k = 1; k < chain.size(); ++k)
    if (chain[k].eventually && !chain[k - 1].eventually) recur_k = static_cast<int>(k);

  const size_t stop = top_pinned ? 1 : 0;
  for (size_t k = chain.size(); k-- > stop;) {
    vals = sliding_extremum(ts, vals, chain[k]);
    if (static_cast<int>(k) == recur_k) {
      // largest prefix of the always window whose anchors all contain a
      // satisfying instant of the nested eventually
      const MergedOp& gop = chain[k - 1];
      double base = prefix_before(chain, k - 1, ev_) + gop.a;
      double hi = base + (gop.b - gop.a);
      double covered = base;
      for (size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] < base - 1e-9) continue;
        if (ts[i] > hi + 1e-9 || vals[i] < 0.0) break;
        covered = ts[i];
      }
      c.frontier_node = chain[k].node_id;
      c.frontier_t_star = std::clamp(covered - base, 0.0, gop.b - gop.a);
    }
  }

  if (top_pinned) {
    auto it = std::lower_bound(ts.begin(), ts.end(), c.pin - 1e-9);
    c.value = it == ts.end() ? -1e300 : vals[static_cast<size_t>(it - ts.begin())];
  } else {
    c.value = vals.empty() ? -1e300 : vals[0];  // sample set includes t = 0
  }
  return c;
}

double RobotBook::chain_robustness(size_t path, const JointTracks& tracks,
                                   double dt) const {
  return group_claim({path}, tracks, dt).value;
}

void RobotBook::refresh(const JointTracks& tracks, double dt) {
  for (size_t gi = 0; gi < groups_.size(); ++gi) {
    const auto& group = groups_[gi];
    Claim c = group_claim(group, tracks, dt);
    if (c.frontier_node >= 0) ev_.at(c.frontier_node).t_star = c.frontier_t_star;
    bool ok = c.value >= 0.0;
    repair_[gi] = ok ? std::nan("") : c.worst_t;
    for (size_t p : group) {
      done_[p] = ok;
      if (ok && c.pinned) witness_[p] = c.pin;
    }
  }

  std::fill(tau_.tau.begin(), tau_.tau.end(), int8_t{-1});
  std::vector<int> seen(tau_.tau.size(), 0), ok(tau_.tau.size(), 0);
  for (size_t p : own_paths())
    for (int id : m_->route_ids(p)) {
      ++seen[id];
      if (done_[p]) ++ok[id];
    }
  for (size_t i = 0; i < tau_.tau.size(); ++i)
    if (seen[i] > 0 && seen[i] == ok[i]) tau_.tau[i] = 1;
}

double RobotBook::witness(size_t path) const {
  auto it = witness_.find(path);
  return it == witness_.end() ? std::nan("") : it->second;
}

void RobotBook::reset() {
  std::fill(tau_.tau.begin(), tau_.tau.end(), int8_t{-1});
  std::fill(done_.begin(), done_.end(), false);
  repair_.assign(groups_.size(), std::nan(""));
  ev_.clear();
  witness_.clear();
}

// ── plan ─────────────────────────────────────────────────────────────────

namespace {

void assemble(PlanResult& res, const Mission& m, SwarmRunner& runner) {
  res.trajectory.tracks.clear();
  res.paths.clear();
  for (const RobotSpec& r : m.robots()) {
    res.trajectory.tracks[r.id] = runner.tree(r.id).vertices();
    const RobotBook& book = runner.book(r.id);
    for (size_t p : m.own_paths(r.id)) {
      PathReport pr;
      pr.robot = r.id;
      pr.path_index = p;
      pr.leaf = m.paths()[p].leaf->text;
      pr.chain_node_ids = m.route_ids(p);
      pr.satisfied = book.done(p);
      pr.witness = book.witness(p);
      ValidityDomain d = book.vd(p);
      pr.vd_lo = d.lo;
      pr.vd_hi = d.hi;
      pr.f_sampled = d.kind == VdKind::FSampled;
      res.paths.push_back(std::move(pr));
    }
  }
}

}  // namespace

PlanResult plan(const Formula& f, const std::vector<RobotSpec>& robots,
                const PlannerParams& params) {
  using clock = std::chrono::steady_clock;
  auto start = clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(clock::now() - start).count();
  };

  Formula pnf = to_pnf(f);
  std::vector<Formula> branches = branch_formulas(pnf);
  std::vector<Mission> missions;
  missions.reserve(branches.size());
  for (Formula& b : branches) missions.emplace_back(std::move(b), robots, params.dt);

  PlanResult res;
  for (int attempt = 0; attempt < params.attempts; ++attempt) {
    if (params.time_limit_s > 0.0 && elapsed() > params.time_limit_s) {
      res.note = "wall clock limit reached";
      break;
    }
    size_t bi = static_cast<size_t>(attempt) % missions.size();
    Mission& m = missions[bi];
    SwarmRunner runner(m, params, static_cast<std::uint64_t>(attempt));
    double budget = params.time_limit_s > 0.0
                        ? std::max(0.0, params.time_limit_s - elapsed())
                        : 0.0;
    SwarmOutcome out = runner.run(budget);
    res.iterations += out.iterations;
    res.messages += static_cast<long>(runner.log().total());
    res.attempts_used = attempt + 1;
    res.branch = static_cast<int>(bi);
    res.branch_text = print_formula(m.formula());
    assemble(res, m, runner);
    if (out.satisfied) {
      res.satisfied = true;
      res.wall_s = elapsed();
      return res;
    }
  }
  if (res.note.empty()) res.note = "sampling budget exhausted";
  res.wall_s = elapsed();
  return res;
}

}  // namespace stlplan
