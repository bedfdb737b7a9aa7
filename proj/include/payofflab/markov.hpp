#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "payofflab/errors.hpp"
#include "payofflab/game.hpp"
#include "payofflab/linalg.hpp"

namespace payofflab {

// Entries above this count as edges of the support graph.
inline constexpr double kSupportThreshold = 1e-14;
inline constexpr double kCesaroTolerance = 1e-12;
// Cap on the number of doublings of the averaging window (window 2^62).
inline constexpr int kCesaroMaxDoublings = 62;

// Row-stochastic 4x4 matrix over (CC, CD, DC, DD).
struct TransitionMatrix {
  Mat4 m{};

  const Vec4& operator[](std::size_t i) const { return m[i]; }
};

struct InitialDistribution {
  Vec4 probs{0.25, 0.25, 0.25, 0.25};

  static InitialDistribution from_initial_actions(double p0, double q0) {
    return {{p0 * q0, p0 * (1.0 - q0), (1.0 - p0) * q0, (1.0 - p0) * (1.0 - q0)}};
  }

  static InitialDistribution from_strategies(const MemoryOneStrategy& p, const MemoryOneStrategy& q) {
    return from_initial_actions(p.initial_cooperation(), q.initial_cooperation());
  }

  static InitialDistribution validated(const Vec4& v) {
    double s = 0.0;
    for (double x : v) {
      if (!(x >= 0.0)) throw ValidationError("initial distribution entries must be non-negative");
      s += x;
    }
    if (std::abs(s - 1.0) > 1e-12) throw ValidationError("initial distribution must sum to 1");
    return {v};
  }
};

// Row CD of the chain is where X played C and Y played D, so Y conditions on
// its own view of that state (DC); likewise row DC uses q_CD.
inline TransitionMatrix transition_matrix(const Vec4& p, const Vec4& q) {
  const std::array<double, 4> qx = {q[0], q[2], q[1], q[3]};
  TransitionMatrix t;
  for (int s = 0; s < 4; ++s) {
    const double a = p[s];
    const double b = qx[s];
    t.m[s] = {a * b, a * (1.0 - b), (1.0 - a) * b, (1.0 - a) * (1.0 - b)};
  }
  return t;
}

inline TransitionMatrix transition_matrix(const MemoryOneStrategy& p, const MemoryOneStrategy& q) {
  return transition_matrix(p.probs(), q.probs());
}

struct ClosedClass {
  std::uint8_t states = 0;  // bitmask over (CC, CD, DC, DD)
  Vec4 nu{};                // stationary distribution supported on `states`

  bool contains(int s) const { return (states >> s) & 1u; }
  int size() const { return __builtin_popcount(states); }
};

struct StationarySet {
  std::vector<ClosedClass> classes;

  bool unique() const { return classes.size() == 1; }
};

namespace detail {

inline std::array<std::uint8_t, 4> reachability(const TransitionMatrix& t) {
  std::array<std::uint8_t, 4> reach{};
  for (int i = 0; i < 4; ++i) {
    reach[i] = static_cast<std::uint8_t>(1u << i);
    for (int j = 0; j < 4; ++j)
      if (t.m[i][j] > kSupportThreshold) reach[i] |= static_cast<std::uint8_t>(1u << j);
  }
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      if ((reach[i] >> k) & 1u) reach[i] |= reach[k];
  return reach;
}

// Solves nu (M_C - I) = 0 with sum(nu) = 1 on the states of one class.
inline Vec4 class_distribution(const TransitionMatrix& t, std::uint8_t states) {
  std::array<int, 4> idx{};
  int k = 0;
  for (int s = 0; s < 4; ++s)
    if ((states >> s) & 1u) idx[k++] = s;
  Mat4 a{};
  Vec4 b{};
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) a[r][c] = t.m[idx[c]][idx[r]] - (r == c ? 1.0 : 0.0);
  for (int c = 0; c < k; ++c) a[k - 1][c] = 1.0;
  b[k - 1] = 1.0;
  const auto x = linalg::solve(a, b, k);
  if (!x) throw DegenerateChainError("singular system for a closed class");
  Vec4 nu{};
  double total = 0.0;
  for (int r = 0; r < k; ++r) {
    nu[idx[r]] = std::max(0.0, (*x)[r]);
    total += nu[idx[r]];
  }
  for (double& v : nu) v /= total;
  return nu;
}

}  // namespace detail

// Closed communicating classes of the support graph and their stationary
// distributions.
inline StationarySet stationary_set(const TransitionMatrix& t) {
  const auto reach = detail::reachability(t);
  StationarySet out;
  std::uint8_t seen = 0;
  for (int i = 0; i < 4; ++i) {
    if ((seen >> i) & 1u) continue;
    bool closed = true;
    for (int j = 0; j < 4; ++j)
      if (((reach[i] >> j) & 1u) && !((reach[j] >> i) & 1u)) closed = false;
    if (!closed) continue;
    // Everything reachable from a recurrent state is its class.
    const std::uint8_t cls = reach[i];
    seen |= cls;
    out.classes.push_back({cls, detail::class_distribution(t, cls)});
  }
  return out;
}

namespace detail {

// Repeated squaring inflates row-sum rounding errors geometrically.
inline void normalize_rows(Mat4& m) {
  for (auto& row : m) {
    const double s = row[0] + row[1] + row[2] + row[3];
    for (double& v : row) v /= s;
  }
}

}  // namespace detail

// lim (1/n) sum_{k=1..n} M^k, with the averaging window doubled each step:
// A_{2n} = (A_n + M^n A_n) / 2. The transient decays like 1/n, so about 40
// doublings are needed for a 1e-12 tolerance.
inline Mat4 cesaro_limit(const TransitionMatrix& t, double tol = kCesaroTolerance) {
  Mat4 avg = t.m;
  Mat4 power = t.m;
  double diff = 0.0;
  for (int d = 0; d < kCesaroMaxDoublings; ++d) {
    const Mat4 shifted = linalg::multiply(power, avg);
    Mat4 next;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) next[i][j] = 0.5 * (avg[i][j] + shifted[i][j]);
    diff = linalg::max_abs_diff(next, avg);
    avg = next;
    detail::normalize_rows(avg);
    if (diff < tol) return avg;
    power = linalg::multiply(power, power);
    detail::normalize_rows(power);
  }
  throw ConvergenceError("Cesaro average did not converge", diff);
}

// Long-run distribution: the stationary vector when unique, otherwise the
// initial distribution pushed through the Cesaro limit.
inline Vec4 long_run_distribution(const TransitionMatrix& t, const InitialDistribution& nu0) {
  const StationarySet set = stationary_set(t);
  if (set.unique()) return set.classes.front().nu;
  return linalg::row_times(nu0.probs, cesaro_limit(t));
}

inline PayoffPair payoffs_from_distribution(const Vec4& nu, const GameParams& g) {
  return {linalg::dot(nu, g.payoff_y()), linalg::dot(nu, g.payoff_x())};
}

inline PayoffPair average_payoffs(const Vec4& p, const Vec4& q, const GameParams& g,
                                  const InitialDistribution& nu0) {
  return payoffs_from_distribution(long_run_distribution(transition_matrix(p, q), nu0), g);
}

inline PayoffPair average_payoffs(const MemoryOneStrategy& p, const MemoryOneStrategy& q,
                                  const GameParams& g,
                                  std::optional<InitialDistribution> nu0 = std::nullopt) {
  return average_payoffs(p.probs(), q.probs(), g,
                         nu0.value_or(InitialDistribution::from_strategies(p, q)));
}

// (1 - lambda) nu0 (I - lambda M)^{-1}, solved as a linear system.
inline Vec4 discounted_distribution(const TransitionMatrix& t, const InitialDistribution& nu0,
                                    double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw ValidationError("discount factor must lie in (0, 1)");
  Mat4 a;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a[i][j] = (i == j ? 1.0 : 0.0) - lambda * t.m[j][i];
  Vec4 b;
  for (int i = 0; i < 4; ++i) b[i] = (1.0 - lambda) * nu0.probs[i];
  const auto x = linalg::solve(a, b);
  if (!x) throw Error("singular discounted system");
  return *x;
}

inline PayoffPair discounted_payoffs(const Vec4& p, const Vec4& q, const GameParams& g,
                                     const InitialDistribution& nu0, double lambda) {
  return payoffs_from_distribution(discounted_distribution(transition_matrix(p, q), nu0, lambda), g);
}

inline PayoffPair discounted_payoffs(const MemoryOneStrategy& p, const MemoryOneStrategy& q,
                                     const GameParams& g, const InitialDistribution& nu0,
                                     double lambda) {
  return discounted_payoffs(p.probs(), q.probs(), g, nu0, lambda);
}

}  // namespace payofflab
