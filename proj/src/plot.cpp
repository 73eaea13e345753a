#include "stlplan/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "stlplan/track.hpp"
#include "stlplan/validity.hpp"

namespace stlplan {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr int kW = 840, kPanelH = 300, kPad = 56;
constexpr size_t kMaxPairPanels = 12;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Range {
  double lo = 1e300, hi = -1e300;
  void take(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (lo > hi) {
      lo = 0;
      hi = 1;
    }
    double m = std::max(1e-6, 0.08 * (hi - lo));
    lo -= m;
    hi += m;
  }
  double map(double v, double out_lo, double out_hi) const {
    return out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo);
  }
};

void polyline(std::ostringstream& svg, const std::vector<std::pair<double, double>>& pts,
              const char* color, bool markers) {
  svg << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.8\" points=\"";
  for (auto [x, y] : pts) svg << num(x) << ',' << num(y) << ' ';
  svg << "\"/>\n";
  if (markers)
    for (auto [x, y] : pts)
      svg << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y)
          << "\" r=\"2.2\" fill=\"" << color << "\"/>\n";
}

// Frame of one panel stacked at vertical offset `top`.
void frame(std::ostringstream& svg, int top, const std::string& xl, const std::string& yl,
           const std::string& caption) {
  svg << "<rect x=\"" << kPad << "\" y=\"" << top + kPad << "\" width=\""
      << kW - 2 * kPad << "\" height=\"" << kPanelH - 2 * kPad
      << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << kW / 2 << "\" y=\"" << top + kPanelH - 14
      << "\" text-anchor=\"middle\" font-size=\"12\">" << xl << "</text>\n";
  svg << "<text x=\"16\" y=\"" << top + kPanelH / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
      << top + kPanelH / 2 << ")\">" << yl << "</text>\n";
  if (!caption.empty())
    svg << "<text x=\"" << kW / 2 << "\" y=\"" << top + kPad - 10
        << "\" text-anchor=\"middle\" font-size=\"13\">" << caption << "</text>\n";
}

void shade_window(std::ostringstream& svg, int top, const Range& rt, double lo,
                  double hi) {
  double x0 = rt.map(std::max(lo, rt.lo), kPad, kW - kPad);
  double x1 = rt.map(std::min(hi, rt.hi), kPad, kW - kPad);
  if (x1 <= x0) return;
  svg << "<rect x=\"" << num(x0) << "\" y=\"" << top + kPad << "\" width=\""
      << num(x1 - x0) << "\" height=\"" << kPanelH - 2 * kPad
      << "\" fill=\"#ffd54f\" fill-opacity=\"0.18\"/>\n";
}

double pair_distance(std::span<const Vertex> a, std::span<const Vertex> b, double t) {
  std::vector<double> xa = interp_vertices(a, t), xb = interp_vertices(b, t);
  size_t n = std::min(xa.size(), xb.size());
  double s = 0.0;
  for (size_t k = 0; k < n; ++k) s += (xa[k] - xb[k]) * (xa[k] - xb[k]);
  return std::sqrt(s);
}

}  // namespace

std::string render_svg(const Trajectory& tr, const Formula* formula,
                       const std::string& title) {
  size_t max_dim = 0;
  double t_end = 1.0;
  for (const auto& [r, verts] : tr.tracks)
    for (const Vertex& v : verts) {
      max_dim = std::max(max_dim, v.x.size());
      t_end = std::max(t_end, v.t);
    }

  // Validity windows per path, grouped by owner pair for the distance panels
  // and kept flat for the time-axis shading.
  std::vector<std::pair<double, double>> windows;
  std::map<std::pair<RobotId, RobotId>, std::vector<std::pair<double, double>>> pairs;
  if (formula) {
    try {
      Formula pnf = to_pnf(*formula);
      EventuallyState ev;
      double th = time_horizon(pnf);
      for (const Path& p : enumerate_paths(pnf)) {
        ValidityDomain d = compute_vd(p, ev, th);
        windows.emplace_back(d.lo, d.hi);
        if (p.owners.size() == 2 && tr.tracks.count(p.owners[0]) &&
            tr.tracks.count(p.owners[1]))
          pairs[{p.owners[0], p.owners[1]}].emplace_back(d.lo, d.hi);
      }
    } catch (const UnsupportedTransform&) {
      // formulas outside the planner fragment just skip the overlays
    }
  }

  size_t pair_panels = std::min(pairs.size(), kMaxPairPanels);
  size_t component_panels = std::min<size_t>(std::max<size_t>(max_dim, 1), 2);
  size_t panels = (max_dim >= 2 ? 1 : 0) + component_panels + pair_panels;
  int height = 36 + static_cast<int>(panels) * kPanelH;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\""
      << height << "\" viewBox=\"0 0 " << kW << ' ' << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kW / 2
      << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";

  int top = 36;

  if (max_dim >= 2) {
    // spatial view
    Range rx, ry;
    for (const auto& [r, verts] : tr.tracks)
      for (const Vertex& v : verts) {
        rx.take(v.x[0]);
        ry.take(v.x.size() > 1 ? v.x[1] : 0.0);
      }
    rx.pad();
    ry.pad();
    frame(svg, top, "c0", "c1", "workspace");
    int ci = 0;
    for (const auto& [r, verts] : tr.tracks) {
      const char* color = kPalette[ci++ % 10];
      std::vector<std::pair<double, double>> pts;
      for (const Vertex& v : verts)
        pts.emplace_back(rx.map(v.x[0], kPad, kW - kPad),
                         ry.map(v.x.size() > 1 ? v.x[1] : 0.0,
                                top + kPanelH - kPad, top + kPad));
      polyline(svg, pts, color, tr.tracks.size() <= 10);
      if (!pts.empty())
        svg << "<text x=\"" << num(pts.front().first + 4) << "\" y=\""
            << num(pts.front().second - 4) << "\" font-size=\"11\" fill=\"" << color
            << "\">x" << r << "</text>\n";
    }
    top += kPanelH;
  }

  Range rt;
  rt.take(0.0);
  rt.take(t_end);
  rt.pad();

  // time-axis views, one per state component
  for (size_t k = 0; k < component_panels; ++k) {
    Range rv;
    for (const auto& [r, verts] : tr.tracks)
      for (const Vertex& v : verts) rv.take(k < v.x.size() ? v.x[k] : 0.0);
    rv.pad();
    std::string comp = "c" + std::to_string(k);
    frame(svg, top, "t", comp, "t vs " + comp);
    for (auto [lo, hi] : windows) shade_window(svg, top, rt, lo, hi);
    int ci = 0;
    for (const auto& [r, verts] : tr.tracks) {
      const char* color = kPalette[ci++ % 10];
      std::vector<std::pair<double, double>> pts;
      for (const Vertex& v : verts)
        pts.emplace_back(rt.map(v.t, kPad, kW - kPad),
                         rv.map(k < v.x.size() ? v.x[k] : 0.0, top + kPanelH - kPad,
                                top + kPad));
      polyline(svg, pts, color, tr.tracks.size() <= 10);
      if (!pts.empty())
        svg << "<text x=\"" << num(pts.back().first + 4) << "\" y=\""
            << num(pts.back().second) << "\" font-size=\"11\" fill=\"" << color
            << "\">x" << r << "</text>\n";
    }
    top += kPanelH;
  }

  // one panel per coupled pair: distance over time with the pair's windows
  size_t drawn = 0;
  for (const auto& [pr, wins] : pairs) {
    if (drawn++ >= kMaxPairPanels) break;
    auto a = tr.tracks.at(pr.first), b = tr.tracks.at(pr.second);
    std::vector<double> ts;
    for (const Vertex& v : a) ts.push_back(v.t);
    for (const Vertex& v : b) ts.push_back(v.t);
    for (int i = 0; i <= 240; ++i) ts.push_back(t_end * i / 240.0);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

    Range rv;
    std::vector<std::pair<double, double>> raw;
    for (double t : ts) {
      double d = pair_distance(a, b, t);
      rv.take(d);
      raw.emplace_back(t, d);
    }
    rv.take(0.0);
    rv.pad();
    std::string cap = "dist(x" + std::to_string(pr.first) + ", x" +
                      std::to_string(pr.second) + ")";
    frame(svg, top, "t", "distance", cap);
    for (auto [lo, hi] : wins) shade_window(svg, top, rt, lo, hi);
    std::vector<std::pair<double, double>> pts;
    for (auto [t, d] : raw)
      pts.emplace_back(rt.map(t, kPad, kW - kPad),
                       rv.map(d, top + kPanelH - kPad, top + kPad));
    polyline(svg, pts, kPalette[(pr.first + pr.second) % 10], false);
    top += kPanelH;
  }
  if (pairs.size() > kMaxPairPanels)
    svg << "<text x=\"" << kW / 2 << "\" y=\"" << top + 16
        << "\" text-anchor=\"middle\" font-size=\"12\">(" << pairs.size() - kMaxPairPanels
        << " more pairs not shown)</text>\n";

  svg << "</svg>\n";
  return svg.str();
}

void write_svg(const std::string& path, const Trajectory& tr, const Formula* formula,
               const std::string& title) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write plot file: " + path);
  out << render_svg(tr, formula, title);
  if (!out) throw std::runtime_error("failed writing plot file: " + path);
}

}  // namespace stlplan
