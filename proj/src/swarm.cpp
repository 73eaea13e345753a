#include "stlplan/swarm.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <optional>
#include <stdexcept>

#include "stlplan/cost.hpp"
#include "stlplan/descent.hpp"

namespace stlplan {

// ── CommGraph ────────────────────────────────────────────────────────────

CommGraph CommGraph::build(const Mission& m) {
  CommGraph g;
  for (const RobotSpec& r : m.robots()) g.ids.push_back(r.id);
  g.neighbors.resize(g.ids.size());
  for (const Path& p : m.paths()) {
    if (p.owners.size() > 2)
      throw std::invalid_argument("predicates may couple at most two robots");
    if (p.owners.size() == 2) {
      RobotId a = p.owners[0], b = p.owners[1];
      if (a > b) std::swap(a, b);
      g.edges.emplace_back(a, b);
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  for (auto [a, b] : g.edges) {
    g.neighbors[m.robot_index(a)].push_back(b);
    g.neighbors[m.robot_index(b)].push_back(a);
  }
  for (auto& nb : g.neighbors) std::sort(nb.begin(), nb.end());
  return g;
}

bool CommGraph::has_edge(RobotId a, RobotId b) const {
  if (a > b) std::swap(a, b);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(a, b));
}

// ── MessageLog ───────────────────────────────────────────────────────────

void MessageLog::init(size_t robots) { per_reader_.assign(robots, {}); }

void MessageLog::record(size_t reader_index, const Message& m) {
  per_reader_[reader_index].push_back(m);
}

std::vector<Message> MessageLog::merged() const {
  std::vector<Message> out;
  for (const auto& v : per_reader_) out.insert(out.end(), v.begin(), v.end());
  return out;
}

size_t MessageLog::total() const {
  size_t n = 0;
  for (const auto& v : per_reader_) n += v.size();
  return n;
}

bool audit_edges(const MessageLog& log, const CommGraph& g) {
  for (const Message& m : log.merged())
    if (!g.has_edge(m.reader, m.owner)) return false;
  return true;
}

// ── Executors ────────────────────────────────────────────────────────────

namespace {

// Per-robot work of a phase: OpenMP fork-join or the serial reference loop.
// Bodies write only their own robot's slots and read published snapshots, so
// both executors produce bit-identical state.
template <class F>
void for_each_robot(bool parallel, int n, F&& fn) {
  std::vector<std::exception_ptr> errs(n);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace

// ── SwarmRunner ──────────────────────────────────────────────────────────

struct SwarmRunner::IterState {
  std::vector<RobotBook::Sampled> samples;
  std::vector<std::vector<ActiveTerm>> terms;
  std::vector<std::vector<RobotId>> needed;  // robots to bind in views, self excluded
  std::vector<std::optional<DescentRun>> runs;
  std::vector<int> cand_idx;  // tentative vertex position in cand_, -1 none
  std::vector<DescentStatus> status;
};

SwarmRunner::SwarmRunner(const Mission& mission, const PlannerParams& params,
                         std::uint64_t attempt)
    : m_(mission), p_(params), attempt_(attempt), graph_(CommGraph::build(mission)) {
  n_ = static_cast<int>(m_.robots().size());
  log_.init(n_);
  trees_.reserve(n_);
  books_.reserve(n_);
  // shared instant draws are keyed without the robot index: every robot,
  // in any communication component, derives the same value per operator
  RngKey tstars = RngKey(p_.seed).with("tstar").with(attempt_);
  for (int i = 0; i < n_; ++i) {
    const RobotSpec& r = m_.robots()[i];
    Rng rng(RngKey(p_.seed).with("xf").with(attempt_).with(static_cast<std::uint64_t>(i)));
    trees_.emplace_back(m_.t_f(), r.x0, rng.box(r.lo, r.hi));
    books_.emplace_back(&m_, r.id);
    books_.back().predraw(tstars);
  }
  published_.resize(n_);
  cand_.resize(n_);
}

const RobotTree& SwarmRunner::tree(RobotId r) const { return trees_[m_.robot_index(r)]; }
const RobotBook& SwarmRunner::book(RobotId r) const { return books_[m_.robot_index(r)]; }

JointTracks SwarmRunner::tracks_for(size_t i, int iter, Phase phase, int round,
                                    const std::vector<std::vector<Vertex>>& snaps) {
  JointTracks t;
  RobotId self = m_.robots()[i].id;
  t.add(self, snaps[i]);
  for (RobotId nb : graph_.neighbors[i]) {
    log_.record(i, {iter, round, phase, self, nb});
    t.add(nb, snaps[m_.robot_index(nb)]);
  }
  return t;
}

void SwarmRunner::publish_trees() {
  for (int i = 0; i < n_; ++i) published_[i] = trees_[i].vertices();
}

void SwarmRunner::publish_candidates(const IterState& it) {
  for (int i = 0; i < n_; ++i)
    if (it.cand_idx[i] >= 0 && it.runs[i]) cand_[i][it.cand_idx[i]].x = it.runs[i]->z();
}

void SwarmRunner::refresh_all(int iter, double dt) {
  for_each_robot(p_.parallel, n_, [&](int i) {
    JointTracks tr = tracks_for(i, iter, Phase::Book, -1, published_);
    books_[i].refresh(tr, dt);
  });
}

bool SwarmRunner::check_success(int iter) {
  for (const RobotBook& b : books_)
    if (!b.all_done()) return false;
  // fine sweep before declaring success
  refresh_all(iter, p_.dt / 5.0);
  for (const RobotBook& b : books_)
    if (!b.all_done()) return false;
  return true;
}

SwarmOutcome SwarmRunner::run(double budget_s) {
  using clock = std::chrono::steady_clock;
  auto start = clock::now();
  auto over = [&] {
    return budget_s > 0.0 &&
           std::chrono::duration<double>(clock::now() - start).count() > budget_s;
  };

  publish_trees();
  refresh_all(-1, p_.dt);
  if (check_success(-1)) return {true, 0};

  int j = 0;
  for (; j < p_.L; ++j) {
    if (over()) break;

    IterState it;
    it.samples.resize(n_);
    it.terms.resize(n_);
    it.needed.resize(n_);
    it.runs.resize(n_);
    it.cand_idx.assign(n_, -1);
    it.status.assign(n_, DescentStatus::Converged);

    // decide: sample an instant, collect active terms, set up the descent
    for_each_robot(p_.parallel, n_, [&](int i) {
      RobotBook& book = books_[i];
      if (book.all_done()) return;
      const RobotSpec& spec = m_.robots()[i];
      RngKey t0k = RngKey(p_.seed)
                       .with("t0")
                       .with(attempt_)
                       .with(static_cast<std::uint64_t>(j))
                       .with(static_cast<std::uint64_t>(i));
      RngKey pk =
          RngKey(p_.seed).with("pick").with(attempt_).with(static_cast<std::uint64_t>(j));
      it.samples[i] = book.sample(t0k, pk, trees_[i].vertices());
      for (size_t p : it.samples[i].active) {
        it.terms[i].push_back({p, m_.paths()[p].leaf, 1.0});
        for (RobotId o : m_.paths()[p].owners)
          if (o != spec.id &&
              std::find(it.needed[i].begin(), it.needed[i].end(), o) == it.needed[i].end())
            it.needed[i].push_back(o);
      }
      std::sort(it.needed[i].begin(), it.needed[i].end());
      if (!it.terms[i].empty()) {
        DescentParams dp;
        dp.delta = p_.delta;
        dp.threshold = 0.0;
        dp.max_iters = p_.Lp;
        dp.box_lo = spec.lo;
        dp.box_hi = spec.hi;
        it.runs[i].emplace(spec.id, trees_[i].interpolate(it.samples[i].t0), dp,
                           RngKey(p_.seed)
                               .with("descent")
                               .with(attempt_)
                               .with(static_cast<std::uint64_t>(j))
                               .with(static_cast<std::uint64_t>(i)));
      }
    });

    // candidate base: current tree plus a tentative vertex at t0
    bool any_run = false;
    for (int i = 0; i < n_; ++i) {
      cand_[i] = trees_[i].vertices();
      if (!it.runs[i]) continue;
      any_run = true;
      double t0 = it.samples[i].t0;
      auto pos = std::lower_bound(cand_[i].begin(), cand_[i].end(), t0,
                                  [](const Vertex& v, double tt) { return v.t < tt; });
      bool dup = (pos != cand_[i].end() && std::abs(pos->t - t0) < 1e-9) ||
                 (pos != cand_[i].begin() && std::abs((pos - 1)->t - t0) < 1e-9);
      if (!dup) {
        it.cand_idx[i] = static_cast<int>(pos - cand_[i].begin());
        cand_[i].insert(pos, Vertex{t0, it.runs[i]->z()});
      }
    }

    // lockstep descent rounds against published candidates
    if (any_run) {
      for (int round = 0; round < p_.Lp; ++round) {
        publish_candidates(it);
        for_each_robot(p_.parallel, n_, [&](int i) {
          JointTracks tr = tracks_for(i, j, Phase::Descent, round, cand_);
          if (!it.runs[i] || it.runs[i]->finished()) return;
          JointState others;
          std::vector<std::vector<double>> storage;
          tr.bind(it.samples[i].t0, it.needed[i], others, storage);
          it.status[i] = it.runs[i]->step(it.terms[i], others);
        });
        bool active = false;
        for (int i = 0; i < n_; ++i)
          if (it.runs[i] && it.status[i] == DescentStatus::Active) active = true;
        if (!active) break;
      }
      publish_candidates(it);
    }

    // gate on the final joint view; splice only zero-cost points
    for_each_robot(p_.parallel, n_, [&](int i) {
      JointTracks tr = tracks_for(i, j, Phase::Gate, -1, cand_);
      if (!it.runs[i]) return;
      JointState view;
      std::vector<std::vector<double>> storage;
      tr.bind(it.samples[i].t0, it.needed[i], view, storage);
      view.set(m_.robots()[i].id, it.runs[i]->z());
      if (assemble_cost(it.terms[i], view) <= 0.0)
        trees_[i].splice(it.samples[i].t0, it.runs[i]->z());
    });
    publish_trees();

    // satisfaction bookkeeping against the published trees
    for_each_robot(p_.parallel, n_, [&](int i) {
      JointTracks tr = tracks_for(i, j, Phase::Book, -1, published_);
      for (size_t p : it.samples[i].active)
        books_[i].note_success(p, it.samples[i].t0, tr);
      books_[i].refresh(tr, p_.dt);
    });

    if (check_success(j)) return {true, j + 1};
  }
  return {false, j};
}

}  // namespace stlplan
