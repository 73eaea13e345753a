#pragma once

// SVG plots of planned trajectories: an x/y view for robots with two or more
// state components, a value-over-time view for one-dimensional robots (with
// the formula's initial validity windows shaded when a formula is given).

#include <string>

#include "stlplan/formula.hpp"
#include "stlplan/monitor.hpp"

namespace stlplan {

std::string render_svg(const Trajectory& tr, const Formula* formula,
                       const std::string& title);

void write_svg(const std::string& path, const Trajectory& tr,
               const Formula* formula, const std::string& title);

}  // namespace stlplan
