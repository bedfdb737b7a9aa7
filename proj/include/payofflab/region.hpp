#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "payofflab/game.hpp"
#include "payofflab/markov.hpp"

namespace payofflab {

// Long-run payoff of one closed class reached by a deterministic co-player.
struct RegionCandidate {
  PayoffPair payoff;
  Vec4 q{};
  std::uint8_t closed_class = 0;  // state bitmask, for audit
};

struct FeasibleRegion {
  std::vector<RegionCandidate> candidates;
  std::vector<PayoffPair> hull;  // counterclockwise in (pi_Y, pi_X)
  PayoffPair rightmost;
  bool degenerate = false;  // hull is a segment or a point
};

namespace detail {

inline double cross(const PayoffPair& o, const PayoffPair& a, const PayoffPair& b) {
  return (a.pi_y - o.pi_y) * (b.pi_x - o.pi_x) - (a.pi_x - o.pi_x) * (b.pi_y - o.pi_y);
}

// Andrew's monotone chain; drops collinear points within `tol`.
inline std::vector<PayoffPair> convex_hull(std::vector<PayoffPair> pts, double tol) {
  std::sort(pts.begin(), pts.end(), [](const PayoffPair& a, const PayoffPair& b) {
    return a.pi_y < b.pi_y || (a.pi_y == b.pi_y && a.pi_x < b.pi_x);
  });
  std::vector<PayoffPair> uniq;
  for (const auto& p : pts) {
    if (!uniq.empty() && std::abs(uniq.back().pi_y - p.pi_y) <= tol && std::abs(uniq.back().pi_x - p.pi_x) <= tol)
      continue;
    uniq.push_back(p);
  }
  if (uniq.size() <= 2) return uniq;
  std::vector<PayoffPair> h(2 * uniq.size());
  std::size_t k = 0;
  for (const auto& p : uniq) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= tol) --k;
    h[k++] = p;
  }
  for (std::size_t i = uniq.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(h[k - 2], h[k - 1], uniq[i]) <= tol) --k;
    h[k++] = uniq[i];
  }
  h.resize(k - 1);
  return h;
}

inline double segment_distance(const PayoffPair& a, const PayoffPair& b, const PayoffPair& p) {
  const double dy = b.pi_y - a.pi_y, dx = b.pi_x - a.pi_x;
  const double len2 = dy * dy + dx * dx;
  double t = len2 > 0.0 ? ((p.pi_y - a.pi_y) * dy + (p.pi_x - a.pi_x) * dx) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.pi_y - (a.pi_y + t * dy), p.pi_x - (a.pi_x + t * dx));
}

}  // namespace detail

// True when `pt` lies in the hull or within `tol` of it.
inline bool hull_contains(const std::vector<PayoffPair>& hull, const PayoffPair& pt, double tol) {
  if (hull.empty()) return false;
  if (hull.size() == 1) return std::hypot(hull[0].pi_y - pt.pi_y, hull[0].pi_x - pt.pi_x) <= tol;
  if (hull.size() == 2) return detail::segment_distance(hull[0], hull[1], pt) <= tol;
  bool inside = true;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    if (detail::cross(a, b, pt) < 0.0) inside = false;
  }
  if (inside) return true;
  for (std::size_t i = 0; i < hull.size(); ++i)
    if (detail::segment_distance(hull[i], hull[(i + 1) % hull.size()], pt) <= tol) return true;
  return false;
}

// Payoffs attainable against p: hull of the closed-class payoffs of all 16
// deterministic co-players.
inline FeasibleRegion feasible_region(const Vec4& p, const GameParams& g) {
  g.validate();
  FeasibleRegion region;
  for (int v = 0; v < 16; ++v) {
    const Vec4 q = {double(v & 1), double((v >> 1) & 1), double((v >> 2) & 1), double((v >> 3) & 1)};
    const StationarySet set = stationary_set(transition_matrix(p, q));
    for (const auto& cls : set.classes)
      region.candidates.push_back({payoffs_from_distribution(cls.nu, g), q, cls.states});
  }
  const double scale = std::max(1.0, g.max_payoff() - g.min_payoff());
  std::vector<PayoffPair> pts;
  pts.reserve(region.candidates.size());
  for (const auto& c : region.candidates) pts.push_back(c.payoff);
  region.hull = detail::convex_hull(pts, 1e-12 * scale * scale);
  region.degenerate = region.hull.size() <= 2;

  const double tie = 1e-12 * scale;
  region.rightmost = pts.front();
  for (const auto& pt : pts) {
    if (pt.pi_y > region.rightmost.pi_y + tie ||
        (std::abs(pt.pi_y - region.rightmost.pi_y) <= tie && pt.pi_x > region.rightmost.pi_x))
      region.rightmost = pt;
  }
  return region;
}

inline FeasibleRegion feasible_region(const MemoryOneStrategy& p, const GameParams& g) {
  return feasible_region(p.probs(), g);
}

enum class FixedStrategyClass { Exploitable, Exploiting, Fair };

inline std::string_view to_string(FixedStrategyClass c) {
  switch (c) {
    case FixedStrategyClass::Exploitable: return "exploitable";
    case FixedStrategyClass::Exploiting: return "exploiting";
    case FixedStrategyClass::Fair: return "fair";
  }
  return "?";
}

inline FixedStrategyClass classify_rightmost(const PayoffPair& rightmost) {
  const double d = rightmost.pi_x - rightmost.pi_y;
  if (std::abs(d) < 1e-9) return FixedStrategyClass::Fair;
  return d > 0.0 ? FixedStrategyClass::Exploiting : FixedStrategyClass::Exploitable;
}

inline FixedStrategyClass classify_fixed_strategy(const MemoryOneStrategy& p, const GameParams& g) {
  return classify_rightmost(feasible_region(p, g).rightmost);
}

}  // namespace payofflab
