#pragma once

// Multi-robot runtime. Robots advance through the iteration in synchronized
// phases: sample an instant, descend in lockstep rounds against the
// neighbours' published candidate trajectories, gate and splice, then update
// satisfaction bookkeeping against the published trees. The per-robot work of
// every phase runs under an OpenMP fork-join loop (or a plain serial loop,
// kept as the reference executor); all cross-robot reads go through published
// snapshots, so the two executors produce bit-identical runs.
//
// Every read of another robot's data is logged. The communication graph has
// an edge exactly where a predicate couples two robots, and the audit checks
// that no read ever crosses a non-edge.

#include <cstdint>
#include <utility>
#include <vector>

#include "stlplan/planner.hpp"

namespace stlplan {

struct CommGraph {
  std::vector<RobotId> ids;                        // mission robot order
  std::vector<std::pair<RobotId, RobotId>> edges;  // lexicographic, deduplicated
  std::vector<std::vector<RobotId>> neighbors;     // indexed like ids, sorted

  static CommGraph build(const Mission& m);
  bool has_edge(RobotId a, RobotId b) const;
};

enum class Phase { Descent = 0, Gate = 1, Book = 2 };

struct Message {
  int iteration = 0;  // -1 for the initial bookkeeping pass
  int round = -1;     // descent round, -1 outside the descent phase
  Phase phase = Phase::Descent;
  RobotId reader = 0, owner = 0;
};

class MessageLog {
public:
  void init(size_t robots);
  void record(size_t reader_index, const Message& m);
  std::vector<Message> merged() const;  // reader-major, deterministic
  size_t total() const;

private:
  std::vector<std::vector<Message>> per_reader_;
};

// True when every logged read crosses a communication edge.
bool audit_edges(const MessageLog& log, const CommGraph& g);

struct SwarmOutcome {
  bool satisfied = false;
  int iterations = 0;
};

class SwarmRunner {
public:
  SwarmRunner(const Mission& mission, const PlannerParams& params,
              std::uint64_t attempt);

  // Runs up to L iterations; stops early on success or when the wall budget
  // (seconds, 0 = unlimited) runs out.
  SwarmOutcome run(double budget_s = 0.0);

  const RobotTree& tree(RobotId r) const;
  const RobotBook& book(RobotId r) const;
  const MessageLog& log() const { return log_; }
  const CommGraph& graph() const { return graph_; }

private:
  struct IterState;

  JointTracks tracks_for(size_t i, int iter, Phase phase, int round,
                         const std::vector<std::vector<Vertex>>& snaps);
  void publish_trees();
  void publish_candidates(const IterState& it);
  void refresh_all(int iter, double dt);
  bool check_success(int iter);

  const Mission& m_;
  PlannerParams p_;
  std::uint64_t attempt_;
  CommGraph graph_;
  std::vector<RobotTree> trees_;
  std::vector<RobotBook> books_;
  std::vector<std::vector<Vertex>> published_;
  std::vector<std::vector<Vertex>> cand_;
  MessageLog log_;
  int n_ = 0;
};

}  // namespace stlplan
