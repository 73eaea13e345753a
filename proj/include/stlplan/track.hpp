#pragma once

// Piecewise-linear tracks and window extrema of predicate robustness along
// them. Both the planner's robust checks and the monitor sit on these
// helpers; they share only this arithmetic, not any satisfaction bookkeeping.

#include <span>
#include <vector>

#include "stlplan/expr.hpp"

namespace stlplan {

struct Vertex {
  double t = 0.0;
  std::vector<double> x;
};

// Clamped piecewise-linear interpolation over vertices sorted by time.
std::vector<double> interp_vertices(std::span<const Vertex> verts, double t);

// Non-owning bundle of per-robot tracks.
class JointTracks {
public:
  void add(RobotId r, std::span<const Vertex> verts);
  bool has(RobotId r) const;
  std::span<const Vertex> track(RobotId r) const;

  // Binds interpolated positions of the given robots at time t. storage keeps
  // the interpolated vectors alive for the lifetime of the state.
  void bind(double t, std::span<const RobotId> robots, JointState& st,
            std::vector<std::vector<double>>& storage) const;

  // Sorted vertex times of the given robots inside [ta, tb], with ta and tb
  // themselves included.
  std::vector<double> breakpoints(double ta, double tb,
                                  std::span<const RobotId> robots) const;

private:
  std::vector<std::span<const Vertex>> tracks_;
};

// rho = -h at one instant.
double rho_at(const Expr& h, const JointTracks& tracks,
              std::span<const RobotId> robots, double t);

// Minimum of rho = -h over [ta, tb] along the joint track. Between vertex
// times the position is affine in t, so the extremum per segment is found in
// closed form for affine h, norms of affine arguments (interior minimizer of
// ||p + s v||), and kinks of |affine|; expressions outside that family fall
// back to a dt-spaced grid per segment.
double min_rho_over(const Expr& h, const JointTracks& tracks,
                    std::span<const RobotId> robots, double ta, double tb,
                    double dt);

// Maximum of rho over the window, same candidate scheme.
double max_rho_over(const Expr& h, const JointTracks& tracks,
                    std::span<const RobotId> robots, double ta, double tb,
                    double dt);

// The candidate evaluation times behind the window extrema: segment endpoints,
// midpoints, Norm/Abs kinks, and the dt grid when the expression is outside
// the closed-form family (always with force_grid). Sorted, deduplicated,
// includes ta and tb.
std::vector<double> sample_times(const Expr& h, const JointTracks& tracks,
                                 std::span<const RobotId> robots, double ta,
                                 double tb, double dt, bool force_grid = false);

}  // namespace stlplan
