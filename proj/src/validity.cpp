#include "stlplan/validity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stlplan {

std::vector<MergedOp> merge_chain(const Path& p) {
  std::vector<MergedOp> out;
  for (const TemporalOp& op : p.chain) {
    if (!out.empty() && out.back().eventually == op.eventually) {
      out.back().a += op.a;
      out.back().b += op.b;
      out.back().absorbed_ids.push_back(op.node_id);
    } else {
      out.push_back({op.eventually, op.a, op.b, op.node_id, {}});
    }
  }
  return out;
}

ValidityDomain compute_vd(const Path& p, const EventuallyState& ev, double th_phi) {
  auto chain = merge_chain(p);
  if (chain.empty()) return {0.0, th_phi, VdKind::GCovered};

  double lo = 0.0, hi = 0.0;
  for (size_t i = 0; i < chain.size(); ++i) {
    const MergedOp& op = chain[i];
    const bool leaf_parent = (i + 1 == chain.size());
    if (op.eventually) {
      EvNodeState st = ev.get(op.node_id);
      if (st.T_star) {
        lo += st.t_star + *st.T_star;
        hi += st.t_star + *st.T_star;
      } else {
        lo += st.t_star + op.a;
        hi += st.t_star + op.b;
      }
    } else if (leaf_parent) {
      lo += op.a;
      hi += op.b;
    } else {
      lo += op.a;
      hi += op.a;
    }
  }
  VdKind kind = chain.back().eventually ? VdKind::FSampled : VdKind::GCovered;
  return {lo, hi, kind};
}

double prefix_before(const std::vector<MergedOp>& chain, size_t opidx,
                     const EventuallyState& ev) {
  double acc = 0.0;
  for (size_t i = 0; i < opidx && i < chain.size(); ++i) {
    const MergedOp& op = chain[i];
    if (op.eventually) {
      EvNodeState st = ev.get(op.node_id);
      acc += st.t_star + (st.T_star ? *st.T_star : op.a);
    } else {
      acc += op.a;
    }
  }
  return acc;
}

void record_eventually_offset(const Path& p, size_t opidx, double offset,
                              EventuallyState& ev) {
  auto chain = merge_chain(p);
  if (opidx >= chain.size() || !chain[opidx].eventually)
    throw std::logic_error("record_eventually: index is not an eventually op");
  const MergedOp& op = chain[opidx];
  constexpr double slack = 1e-9;
  if (offset < op.a - slack || offset > op.b + slack)
    throw std::logic_error("record_eventually: instant outside sampling window");
  offset = std::clamp(offset, op.a, op.b);
  EvNodeState& st = ev.at(op.node_id);
  st.t_star = offset;
  st.T_star.reset();
}

void record_eventually(const Path& p, size_t opidx, double t0, EventuallyState& ev) {
  auto chain = merge_chain(p);
  if (opidx >= chain.size() || !chain[opidx].eventually)
    throw std::logic_error("record_eventually: index is not an eventually op");
  // the offset is taken against the chain prefix alone: a later instant in
  // the same window simply replaces the recorded one (last instance wins)
  double offset = t0 - prefix_before(chain, opidx, ev);
  record_eventually_offset(p, opidx, offset, ev);
}

void reset_path_eventually(const Path& p, EventuallyState& ev) {
  for (const TemporalOp& op : p.chain)
    if (op.eventually) ev.erase(op.node_id);
}

void reset_eventually_all(const std::vector<Path>& paths, EventuallyState& ev) {
  for (const Path& p : paths) reset_path_eventually(p, ev);
}

}  // namespace stlplan
