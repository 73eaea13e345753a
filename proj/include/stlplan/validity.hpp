#pragma once

// Validity domains: the time sets over which a path's leaf predicate
// constrains the trajectory, derived from the recursion
//   vd(mu) = [0, th(phi)]            (bare predicate: always active)
//   vd(G[a,b] mu) = [a, b]
//   vd(G[a,b] phi1) = a (+) vd(phi1)
//   vd(F[a,b] phi1) = t* + T* (+) vd(phi1)
// where T* is the drawn satisfaction instant in [a, b] (the whole window when
// free) and t* stores the last recorded instance, initialized 0. Adjacent
// same-kind operators compose exactly (G[a1,b1]G[a2,b2] = G[a1+a2,b1+b2], same
// for F), which is how nested same-operator chains get their wider domain.
//
// A domain is F-sampled when the leaf's governing operator is an eventually
// (hold at one sampled instant) and G-covered otherwise (hold throughout).

#include <optional>
#include <unordered_map>
#include <vector>

#include "stlplan/formula.hpp"

namespace stlplan {

enum class VdKind { FSampled, GCovered };

struct ValidityDomain {
  double lo = 0.0, hi = 0.0;
  VdKind kind = VdKind::GCovered;

  bool contains(double t) const { return t >= lo && t <= hi; }
  bool point() const { return lo == hi; }
};

// Per eventually-node bookkeeping. T_star is a drawn-but-unrecorded offset in
// the node's own window; it pins the domain until it is folded into t_star.
struct EvNodeState {
  double t_star = 0.0;
  std::optional<double> T_star;
};

class EventuallyState {
public:
  EvNodeState& at(int node_id) { return m_[node_id]; }
  EvNodeState get(int node_id) const {
    auto it = m_.find(node_id);
    return it == m_.end() ? EvNodeState{} : it->second;
  }
  void erase(int node_id) { m_.erase(node_id); }
  void clear() { m_.clear(); }

private:
  std::unordered_map<int, EvNodeState> m_;
};

// A path's chain with adjacent same-kind operators merged (windows summed).
// Merged ops keep the outermost node id as primary and record absorbed ids so
// satisfaction updates can mirror onto them.
struct MergedOp {
  bool eventually = false;
  double a = 0.0, b = 0.0;
  int node_id = -1;
  std::vector<int> absorbed_ids;
};

std::vector<MergedOp> merge_chain(const Path& p);

// Activation domain of the path under the current eventually state. th_phi is
// the whole formula's horizon (used by the bare-predicate rule).
ValidityDomain compute_vd(const Path& p, const EventuallyState& ev, double th_phi);

// Lower-edge prefix accumulated before the merged op at index opidx:
// contributions are a for each earlier G and t* + (T* if pinned else a) for
// each earlier F.
double prefix_before(const std::vector<MergedOp>& chain, size_t opidx,
                     const EventuallyState& ev);

// Records a satisfaction instant for the eventually op at opidx: the offset
// T* = t0 - prefix - t*_old is drawn and immediately folded (t* := T*, domain
// free again). t0 must lie in the node's current sampling window.
void record_eventually(const Path& p, size_t opidx, double t0, EventuallyState& ev);

// Same, with the offset supplied directly (used when the witness is an
// anchored window rather than the sampled instant itself).
void record_eventually_offset(const Path& p, size_t opidx, double offset,
                              EventuallyState& ev);

// Clears t*/T* of every eventually op on the path.
void reset_path_eventually(const Path& p, EventuallyState& ev);

// Clears every eventually op across all paths (outer-loop reset).
void reset_eventually_all(const std::vector<Path>& paths, EventuallyState& ev);

}  // namespace stlplan
