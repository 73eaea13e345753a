#include "stlplan/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace stlplan {

namespace {

constexpr double kBig = 1e300;
constexpr double kEps = 1e-9;

class Monitor {
public:
  Monitor(const Formula& f, const Trajectory& tr, const MonitorOptions& opt)
      : opt_(opt) {
    for (const auto& [r, vs] : tr.tracks) {
      if (vs.empty()) continue;
      tracks_.add(r, vs);
      for (const Vertex& v : vs) grid_.push_back(v.t);
    }
    double end = std::max(time_horizon(f), tr.t_end());
    for (double t = 0.0; t <= end + kEps; t += opt_.dt) grid_.push_back(t);
    grid_.push_back(end);
    std::sort(grid_.begin(), grid_.end());
    grid_.erase(std::unique(grid_.begin(), grid_.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                grid_.end());
  }

  double rho(const Formula& f, double t) {
    switch (f.kind) {
      case FKind::True:
        return kBig;
      case FKind::Pred:
        return rho_at(f.pred->h, tracks_, f.pred->owners, t);
      case FKind::Not:
        return -rho(f.kids[0], t);
      case FKind::And: {
        double m = kBig;
        for (const Formula& k : f.kids) m = std::min(m, rho(k, t));
        return m;
      }
      case FKind::Or: {
        double m = -kBig;
        for (const Formula& k : f.kids) m = std::max(m, rho(k, t));
        return m;
      }
      case FKind::Always:
        return window(f.kids[0], t + f.a, t + f.b, false);
      case FKind::Eventually:
        return window(f.kids[0], t + f.a, t + f.b, true);
      case FKind::Until: {
        // sup over t1 of min(rho(phi2, t1), inf over [t, t1] of rho(phi1))
        double inf1 = rho(f.kids[0], t);
        double best = -kBig;
        for (size_t i = first_at_or_after(t); i < grid_.size(); ++i) {
          double g = grid_[i];
          if (g > t + f.b + kEps) break;
          inf1 = std::min(inf1, at_grid(f.kids[0], i));
          if (g >= t + f.a - kEps)
            best = std::max(best, std::min(at_grid(f.kids[1], i), inf1));
        }
        return best;
      }
    }
    return -kBig;
  }

private:
  double window(const Formula& kid, double ta, double tb, bool want_max) {
    if (kid.kind == FKind::Pred) {
      return want_max ? max_rho_over(kid.pred->h, tracks_, kid.pred->owners, ta, tb, opt_.dt)
                      : min_rho_over(kid.pred->h, tracks_, kid.pred->owners, ta, tb, opt_.dt);
    }
    double best = want_max ? -kBig : kBig;
    bool any = false;
    for (size_t i = first_at_or_after(ta); i < grid_.size(); ++i) {
      if (grid_[i] > tb + kEps) break;
      double v = at_grid(kid, i);
      best = want_max ? std::max(best, v) : std::min(best, v);
      any = true;
    }
    if (!any) best = rho(kid, ta);  // window fell between grid points
    return best;
  }

  size_t first_at_or_after(double t) {
    auto it = std::lower_bound(grid_.begin(), grid_.end(), t - kEps);
    return static_cast<size_t>(it - grid_.begin());
  }

  double at_grid(const Formula& f, size_t i) {
    if (f.kind == FKind::Pred) return rho_at(f.pred->h, tracks_, f.pred->owners, grid_[i]);
    auto& vals = memo_[&f];
    if (vals.empty()) vals.assign(grid_.size(), std::numeric_limits<double>::quiet_NaN());
    if (std::isnan(vals[i])) vals[i] = rho(f, grid_[i]);
    return vals[i];
  }

  MonitorOptions opt_;
  JointTracks tracks_;
  std::vector<double> grid_;
  std::unordered_map<const Formula*, std::vector<double>> memo_;
};

void collect_predicates(const Formula& f,
                        std::vector<std::shared_ptr<const Predicate>>& out) {
  if (f.kind == FKind::Pred) {
    for (const auto& p : out)
      if (p->id == f.pred->id) return;
    out.push_back(f.pred);
  }
  for (const Formula& k : f.kids) collect_predicates(k, out);
}

void check_coverage(const Formula& f, const Trajectory& tr) {
  std::vector<std::shared_ptr<const Predicate>> preds;
  collect_predicates(f, preds);
  for (const auto& p : preds)
    for (RobotId r : p->owners) {
      auto it = tr.tracks.find(r);
      if (it == tr.tracks.end() || it->second.empty())
        throw std::invalid_argument("trajectory has no track for robot x" +
                                    std::to_string(r));
    }
}

}  // namespace

double robustness(const Formula& f, const Trajectory& tr, double t,
                  const MonitorOptions& opt) {
  check_coverage(f, tr);
  Monitor m(f, tr, opt);
  return m.rho(f, t);
}

MonitorReport monitor(const Formula& f, const Trajectory& tr,
                      const MonitorOptions& opt) {
  check_coverage(f, tr);
  Monitor m(f, tr, opt);
  MonitorReport rep;
  rep.rho = m.rho(f, 0.0);
  rep.satisfied = rep.rho >= -opt.tol;

  std::vector<std::shared_ptr<const Predicate>> preds;
  collect_predicates(f, preds);
  JointTracks tracks;
  for (const auto& [r, vs] : tr.tracks)
    if (!vs.empty()) tracks.add(r, vs);
  double end = std::max(time_horizon(f), tr.t_end());
  for (const auto& p : preds) {
    PredicateStat st;
    st.text = p->text;
    // h extrema are the negated robustness extrema over the whole span
    st.h_min = -max_rho_over(p->h, tracks, p->owners, 0.0, end, opt.dt);
    st.h_max = -min_rho_over(p->h, tracks, p->owners, 0.0, end, opt.dt);
    rep.predicates.push_back(st);
  }
  return rep;
}

}  // namespace stlplan
