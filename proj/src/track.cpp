#include "stlplan/track.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stlplan {

std::vector<double> interp_vertices(std::span<const Vertex> verts, double t) {
  if (verts.empty()) throw std::logic_error("interp on empty track");
  if (t <= verts.front().t) return verts.front().x;
  if (t >= verts.back().t) return verts.back().x;
  auto it = std::upper_bound(verts.begin(), verts.end(), t,
                             [](double v, const Vertex& a) { return v < a.t; });
  const Vertex& hi = *it;
  const Vertex& lo = *(it - 1);
  double span = hi.t - lo.t;
  double s = span > 0.0 ? (t - lo.t) / span : 0.0;
  std::vector<double> out(lo.x.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = lo.x[i] + s * (hi.x[i] - lo.x[i]);
  return out;
}

void JointTracks::add(RobotId r, std::span<const Vertex> verts) {
  if (r < 0) throw std::invalid_argument("negative robot id");
  if (static_cast<size_t>(r) >= tracks_.size()) tracks_.resize(r + 1);
  tracks_[r] = verts;
}

bool JointTracks::has(RobotId r) const {
  return r >= 0 && static_cast<size_t>(r) < tracks_.size() && !tracks_[r].empty();
}

std::span<const Vertex> JointTracks::track(RobotId r) const {
  if (!has(r)) throw std::out_of_range("no track for robot " + std::to_string(r));
  return tracks_[r];
}

void JointTracks::bind(double t, std::span<const RobotId> robots, JointState& st,
                       std::vector<std::vector<double>>& storage) const {
  storage.reserve(storage.size() + robots.size());
  st.t = t;
  for (RobotId r : robots) {
    storage.push_back(interp_vertices(track(r), t));
    st.set(r, storage.back());
  }
}

std::vector<double> JointTracks::breakpoints(double ta, double tb,
                                             std::span<const RobotId> robots) const {
  std::vector<double> ts{ta, tb};
  for (RobotId r : robots)
    for (const Vertex& v : track(r))
      if (v.t > ta && v.t < tb) ts.push_back(v.t);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

namespace {

bool state_time_free(const Expr& e) {
  if (e.kind == ExprKind::State || e.kind == ExprKind::Time) return false;
  for (const Expr& k : e.kids)
    if (!state_time_free(k)) return false;
  return true;
}

// Affine in the robot states and in time, hence affine in t along a segment.
bool affine_along(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Const:
    case ExprKind::Time:
    case ExprKind::State:
      return true;
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Neg:
      for (const Expr& k : e.kids)
        if (!affine_along(k)) return false;
      return true;
    case ExprKind::Mul:
      return (state_time_free(e.kids[0]) && affine_along(e.kids[1])) ||
             (state_time_free(e.kids[1]) && affine_along(e.kids[0]));
    case ExprKind::Div:
      return affine_along(e.kids[0]) && state_time_free(e.kids[1]);
    default:
      return false;
  }
}

void count_kinks(const Expr& e, int& norms, bool& exact) {
  switch (e.kind) {
    case ExprKind::Norm:
    case ExprKind::Abs:
      ++norms;
      if (!affine_along(e.kids[0])) exact = false;
      return;
    case ExprKind::Const:
    case ExprKind::Time:
    case ExprKind::State:
      return;
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Neg:
      for (const Expr& k : e.kids) count_kinks(k, norms, exact);
      return;
    case ExprKind::Mul:
    case ExprKind::Div:
      if (state_time_free(e.kids[1]))
        count_kinks(e.kids[0], norms, exact);
      else if (e.kind == ExprKind::Mul && state_time_free(e.kids[0]))
        count_kinks(e.kids[1], norms, exact);
      else
        exact = false;
      return;
    default:
      exact = false;
      return;
  }
}

// Interior candidate times for Norm/Abs nodes along one segment.
void kink_candidates(const Expr& e, const JointState& st0, const JointState& st1,
                     double s0, double s1, std::vector<double>& out) {
  if (e.kind == ExprKind::Norm && affine_along(e.kids[0])) {
    Value p = eval(e.kids[0], st0);
    Value q = eval(e.kids[0], st1);
    double vv = 0.0, pv = 0.0;
    for (int i = 0; i < p.n; ++i) {
      double d = q.v[i] - p.v[i];
      vv += d * d;
      pv += p.v[i] * d;
    }
    if (vv > 0.0) {
      double s = std::clamp(-pv / vv, 0.0, 1.0);
      out.push_back(s0 + s * (s1 - s0));
    }
  } else if (e.kind == ExprKind::Abs && affine_along(e.kids[0])) {
    double p = eval(e.kids[0], st0).as_scalar();
    double q = eval(e.kids[0], st1).as_scalar();
    if ((p < 0.0) != (q < 0.0) && p != q)
      out.push_back(s0 + (p / (p - q)) * (s1 - s0));
  }
  for (const Expr& k : e.kids) kink_candidates(k, st0, st1, s0, s1, out);
}

double extremum(const Expr& h, const JointTracks& tracks,
                std::span<const RobotId> robots, double ta, double tb, double dt,
                bool want_max) {
  double best = want_max ? -1e300 : 1e300;
  for (double t : sample_times(h, tracks, robots, ta, tb, dt)) {
    JointState st;
    std::vector<std::vector<double>> storage;
    tracks.bind(t, robots, st, storage);
    double rho = -eval(h, st).as_scalar();
    if (want_max ? rho > best : rho < best) best = rho;
  }
  return best;
}

}  // namespace

std::vector<double> sample_times(const Expr& h, const JointTracks& tracks,
                                 std::span<const RobotId> robots, double ta,
                                 double tb, double dt, bool force_grid) {
  if (tb < ta) std::swap(ta, tb);
  auto segs = tracks.breakpoints(ta, tb, robots);
  int norms = 0;
  bool exact = true;
  count_kinks(h, norms, exact);
  bool grid = force_grid || !exact || norms >= 2;

  std::vector<double> out;
  if (segs.size() == 1) {
    out.push_back(segs[0]);
    return out;
  }
  for (size_t i = 0; i + 1 < segs.size(); ++i) {
    double s0 = segs[i], s1 = segs[i + 1];
    out.push_back(s0);
    out.push_back(s1);
    out.push_back(0.5 * (s0 + s1));
    if (norms > 0) {
      JointState a, b;
      std::vector<std::vector<double>> sa, sb;
      tracks.bind(s0, robots, a, sa);
      tracks.bind(s1, robots, b, sb);
      kink_candidates(h, a, b, s0, s1, out);
    }
    if (grid && dt > 0.0)
      for (double t = s0 + dt; t < s1; t += dt) out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-12; }),
            out.end());
  return out;
}

double rho_at(const Expr& h, const JointTracks& tracks,
              std::span<const RobotId> robots, double t) {
  JointState st;
  std::vector<std::vector<double>> storage;
  tracks.bind(t, robots, st, storage);
  return -eval(h, st).as_scalar();
}

double min_rho_over(const Expr& h, const JointTracks& tracks,
                    std::span<const RobotId> robots, double ta, double tb,
                    double dt) {
  return extremum(h, tracks, robots, ta, tb, dt, false);
}

double max_rho_over(const Expr& h, const JointTracks& tracks,
                    std::span<const RobotId> robots, double ta, double tb,
                    double dt) {
  return extremum(h, tracks, robots, ta, tb, dt, true);
}

}  // namespace stlplan
