#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "payofflab/experiments.hpp"
#include "payofflab/learn.hpp"
#include "payofflab/region.hpp"

namespace payofflab::svg {

namespace detail {

constexpr double kWidth = 480, kHeight = 480, kMargin = 48;

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline void open(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  os << "<title>" << title << "</title>\n";
  os << "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" fill=\"white\"/>\n";
}

inline void axes(std::ostringstream& os, const std::string& xlabel, const std::string& ylabel) {
  const double x0 = kMargin, y0 = kHeight - kMargin, x1 = kWidth - kMargin / 2, y1 = kMargin / 2;
  os << "<line class=\"axis\" x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
     << "\" stroke=\"black\"/>\n";
  os << "<line class=\"axis\" x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\" font-size=\"14\">"
     << xlabel << "</text>\n";
  os << "<text x=\"14\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 14 "
     << (y0 + y1) / 2 << ")\">" << ylabel << "</text>\n";
}

// Maps data coordinates onto the plot area.
struct Frame {
  double xlo, xhi, ylo, yhi;
  double px(double x) const {
    const double span = xhi > xlo ? xhi - xlo : 1.0;
    return kMargin + (x - xlo) / span * (kWidth - 1.5 * kMargin);
  }
  double py(double y) const {
    const double span = yhi > ylo ? yhi - ylo : 1.0;
    return kHeight - kMargin - (y - ylo) / span * (kHeight - 1.5 * kMargin);
  }
};

// White to dark red on a log scale.
inline std::string heat_color(std::int64_t count, std::int64_t max_count) {
  const double t = max_count > 1 ? std::log1p(double(count)) / std::log1p(double(max_count)) : 1.0;
  const int g = static_cast<int>(std::lround(230 * (1 - t)));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", 255 - static_cast<int>(std::lround(80 * t)), g, g);
  return buf;
}

}  // namespace detail

// Density of endpoint payoffs over the (pi_Y, pi_X) box, with the hull of
// all attainable payoffs of the game outlined.
inline std::string heatmap(const HeatmapGrid& grid, const GameParams& g) {
  std::ostringstream os;
  detail::open(os, "endpoint payoff density");
  const detail::Frame f{grid.lo, grid.hi, grid.lo, grid.hi};
  const std::int64_t max_count = grid.counts.empty() ? 0 : *std::max_element(grid.counts.begin(), grid.counts.end());
  const double w = (grid.hi - grid.lo) / std::max(grid.bins, 1);
  for (int row = 0; row < grid.bins; ++row) {
    for (int col = 0; col < grid.bins; ++col) {
      const auto c = grid.at(row, col);
      if (c == 0) continue;
      const double x = f.px(grid.lo + col * w), y = f.py(grid.lo + (row + 1) * w);
      const double wpx = f.px(grid.lo + (col + 1) * w) - x, hpx = f.py(grid.lo + row * w) - y;
      os << "<rect class=\"cell\" x=\"" << detail::num(x) << "\" y=\"" << detail::num(y) << "\" width=\""
         << detail::num(std::max(wpx, 1.0)) << "\" height=\"" << detail::num(std::max(hpx, 1.0)) << "\" fill=\""
         << detail::heat_color(c, max_count) << "\"><title>" << c << "</title></rect>\n";
    }
  }
  // Outcomes (R,R), (T,S), (P,P), (S,T) as (pi_Y, pi_X); their hull is the
  // set of all attainable payoff pairs.
  const auto h = payofflab::detail::convex_hull({{g.R, g.R}, {g.T, g.S}, {g.P, g.P}, {g.S, g.T}}, 0.0);
  os << "<polygon class=\"hull\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < h.size(); ++i)
    os << (i ? " " : "") << detail::num(f.px(h[i].pi_y)) << ',' << detail::num(f.py(h[i].pi_x));
  os << "\"/>\n";
  detail::axes(os, "pi_Y", "pi_X");
  os << "</svg>\n";
  return os.str();
}

// Strategy components against iteration.
inline std::string trajectory(const Trajectory& tr) {
  static constexpr const char* kColors[4] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};
  std::ostringstream os;
  detail::open(os, "strategy trajectory");
  const double last = tr.records.empty() ? 1.0 : std::max<double>(1.0, double(tr.records.back().iteration));
  const detail::Frame f{0.0, last, 0.0, 1.0};
  if (!tr.records.empty()) {
    for (int i = 0; i < 4; ++i) {
      os << "<polyline class=\"component\" data-state=\"" << kStateNames[i] << "\" fill=\"none\" stroke=\""
         << kColors[i] << "\" points=\"";
      for (std::size_t r = 0; r < tr.records.size(); ++r)
        os << (r ? " " : "") << detail::num(f.px(double(tr.records[r].iteration))) << ','
           << detail::num(f.py(tr.records[r].q[i]));
      os << "\"/>\n";
    }
  }
  detail::axes(os, "iteration", "q");
  os << "</svg>\n";
  return os.str();
}

}  // namespace payofflab::svg
