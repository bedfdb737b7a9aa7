#pragma once

#include <array>
#include <cmath>

#include "payofflab/errors.hpp"
#include "payofflab/game.hpp"
#include "payofflab/linalg.hpp"
#include "payofflab/markov.hpp"

namespace payofflab {

// |D| below this means the chain has no unique stationary distribution.
inline constexpr double kDegenerateThreshold = 1e-12;
// Discount used for gradients at degenerate points.
inline constexpr double kFallbackDiscount = 1.0 - 1e-6;

// Cofactors of the payoff column of the Press-Dyson determinant. They pair
// with Y's payoffs R, S, T, P and are proportional to (nu_CC, nu_DC, nu_CD,
// nu_DD).
struct MultilinearComponents {
  double f_cc = 0, f_dc = 0, f_cd = 0, f_dd = 0;
  double f_sigma = 0;

  // Stationary distribution in (CC, CD, DC, DD) order; requires f_sigma != 0.
  Vec4 distribution() const { return {f_cc / f_sigma, f_cd / f_sigma, f_dc / f_sigma, f_dd / f_sigma}; }

  double numerator_y(const GameParams& g) const {
    return f_cc * g.R + f_dc * g.S + f_cd * g.T + f_dd * g.P;
  }
  double numerator_x(const GameParams& g) const {
    return f_cc * g.R + f_dc * g.T + f_cd * g.S + f_dd * g.P;
  }
};

struct PayoffGradient {
  Vec4 d_pi_y{};  // d pi_Y / d q_xy for xy in (CC, CD, DC, DD)
  Vec4 d_pi_x{};

  double max_norm() const {
    double m = 0.0;
    for (double v : d_pi_y) m = std::max(m, std::abs(v));
    return m;
  }
};

// Rows in the determinant's order (CC, DC, CD, DD); `column` is the last
// column (payoffs or ones).
inline Mat4 press_dyson_matrix(const Vec4& p, const Vec4& q, const Vec4& column) {
  return {{
      {p[0] * q[0] - 1.0, p[0] - 1.0, q[0] - 1.0, column[0]},
      {p[2] * q[1], p[2], q[1] - 1.0, column[1]},
      {p[1] * q[2], p[1] - 1.0, q[2], column[2]},
      {p[3] * q[3], p[3], q[3], column[3]},
  }};
}

inline MultilinearComponents multilinear_components(const Vec4& p, const Vec4& q) {
  const Mat4 m = press_dyson_matrix(p, q, {0, 0, 0, 0});
  constexpr std::array<int, 3> cols = {0, 1, 2};
  MultilinearComponents f;
  f.f_cc = -linalg::det3(m, {1, 2, 3}, cols);
  f.f_dc = linalg::det3(m, {0, 2, 3}, cols);
  f.f_cd = -linalg::det3(m, {0, 1, 3}, cols);
  f.f_dd = linalg::det3(m, {0, 1, 2}, cols);
  linalg::CompensatedSum s;
  s.add(f.f_cc);
  s.add(f.f_dc);
  s.add(f.f_cd);
  s.add(f.f_dd);
  f.f_sigma = s.value();
  return f;
}

inline MultilinearComponents multilinear_components(const MemoryOneStrategy& p, const MemoryOneStrategy& q) {
  return multilinear_components(p.probs(), q.probs());
}

namespace detail {

struct DeterminantTriple {
  double den, num_y, num_x;
};

inline DeterminantTriple determinants(const Vec4& p, const Vec4& q, const GameParams& g) {
  const double den = linalg::det4(press_dyson_matrix(p, q, {1, 1, 1, 1}));
  const double ny = linalg::det4(press_dyson_matrix(p, q, {g.R, g.S, g.T, g.P}));
  const double nx = linalg::det4(press_dyson_matrix(p, q, {g.R, g.T, g.S, g.P}));
  return {den, ny, nx};
}

}  // namespace detail

// Ratio of the two Press-Dyson determinants; pi_X swaps in X's payoffs for
// the state of each determinant row.
inline PayoffPair press_dyson_payoff(const Vec4& p, const Vec4& q, const GameParams& g) {
  const auto d = detail::determinants(p, q, g);
  if (std::abs(d.den) < kDegenerateThreshold) {
    throw DegenerateChainError("Press-Dyson denominator vanishes: stationary distribution is not unique");
  }
  return {d.num_y / d.den, d.num_x / d.den};
}

inline PayoffPair press_dyson_payoff(const MemoryOneStrategy& p, const MemoryOneStrategy& q,
                                     const GameParams& g) {
  return press_dyson_payoff(p.probs(), q.probs(), g);
}

// Exact gradient: numerator and denominator are affine in each q_xy, so
// their partials are differences of the values at q_xy = 1 and q_xy = 0.
inline PayoffGradient payoff_gradient(const Vec4& p, const Vec4& q, const GameParams& g) {
  const auto at = detail::determinants(p, q, g);
  if (std::abs(at.den) < kDegenerateThreshold) {
    throw DegenerateChainError("payoff gradient undefined: stationary distribution is not unique");
  }
  PayoffGradient grad;
  const double den2 = at.den * at.den;
  for (int i = 0; i < 4; ++i) {
    Vec4 hi = q, lo = q;
    hi[i] = 1.0;
    lo[i] = 0.0;
    const auto a = detail::determinants(p, hi, g);
    const auto b = detail::determinants(p, lo, g);
    const double dd = a.den - b.den;
    grad.d_pi_y[i] = ((a.num_y - b.num_y) * at.den - at.num_y * dd) / den2;
    grad.d_pi_x[i] = ((a.num_x - b.num_x) * at.den - at.num_x * dd) / den2;
  }
  return grad;
}

inline PayoffGradient payoff_gradient(const MemoryOneStrategy& p, const MemoryOneStrategy& q,
                                      const GameParams& g) {
  return payoff_gradient(p.probs(), q.probs(), g);
}

struct PayoffWithGradient {
  PayoffPair payoff;
  PayoffGradient gradient;
};

// Discounted payoffs and their exact q-gradient. With A = I - lambda M,
// x = (1 - lambda) nu0 A^{-1} and y = A^{-1} u, d pi / d q = lambda x (dM/dq) y.
inline PayoffWithGradient discounted_payoff_gradient(const Vec4& p, const Vec4& q, const GameParams& g,
                                                     const InitialDistribution& nu0, double lambda) {
  const TransitionMatrix t = transition_matrix(p, q);
  const Vec4 x = discounted_distribution(t, nu0, lambda);
  Mat4 a;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a[i][j] = (i == j ? 1.0 : 0.0) - lambda * t.m[i][j];
  const auto yy = linalg::solve(a, g.payoff_y());
  const auto yx = linalg::solve(a, g.payoff_x());
  if (!yy || !yx) throw Error("singular discounted system");

  PayoffWithGradient out;
  out.payoff = payoffs_from_distribution(x, g);
  // Component of q that drives each chain row: q_CC -> CC, q_DC -> CD,
  // q_CD -> DC, q_DD -> DD.
  constexpr std::array<int, 4> row_of = {0, 2, 1, 3};
  for (int i = 0; i < 4; ++i) {
    const int r = row_of[i];
    const double pa = p[r];
    auto d = [&](const Vec4& y) { return pa * (y[0] - y[1]) + (1.0 - pa) * (y[2] - y[3]); };
    out.gradient.d_pi_y[i] = lambda * x[r] * d(*yy);
    out.gradient.d_pi_x[i] = lambda * x[r] * d(*yx);
  }
  return out;
}

// Multilinear function on [0,1]^4 stored by its values at the 16 vertices
// (bit i of the vertex index is coordinate i). Evaluation folds one
// coordinate at a time and carries partial derivatives along.
template <int K>
class MultilinearField {
public:
  using Values = std::array<double, K>;

  struct Evaluation {
    Values value{};
    std::array<Values, 4> partial{};
  };

  MultilinearField() = default;
  explicit MultilinearField(const std::array<Values, 16>& vertex) : vertex_(vertex) {}

  const std::array<Values, 16>& vertices() const { return vertex_; }

  Evaluation evaluate(const Vec4& q) const {
    // Node layout after folding dimensions d+1..3: value plus partials for
    // the folded dimensions.
    struct Node {
      Values v;
      std::array<Values, 4> dv;
    };
    std::array<Node, 16> cur;
    for (int i = 0; i < 16; ++i) cur[i].v = vertex_[i];
    int count = 16;
    for (int d = 3; d >= 0; --d) {
      const int half = count / 2;
      const double t = q[d];
      const double s = 1.0 - t;
      for (int u = 0; u < half; ++u) {
        Node& lo = cur[u];
        const Node& hi = cur[u + half];
        for (int k = 0; k < K; ++k) {
          for (int e = d + 1; e < 4; ++e) lo.dv[e][k] = lo.dv[e][k] * s + hi.dv[e][k] * t;
          lo.dv[d][k] = hi.v[k] - lo.v[k];
          lo.v[k] = lo.v[k] * s + hi.v[k] * t;
        }
      }
      count = half;
    }
    return {cur[0].v, cur[0].dv};
  }

private:
  std::array<Values, 16> vertex_{};
};

inline Vec4 vertex_point(int v) {
  return {double(v & 1), double((v >> 1) & 1), double((v >> 2) & 1), double((v >> 3) & 1)};
}

struct LandscapePoint {
  PayoffPair payoff;
  Vec4 grad_y{};
  bool degenerate = false;
};

// Payoff landscape of Y against a fixed p: the Press-Dyson numerators and
// denominator as multilinear fields in q, precomputed once per p.
class Landscape {
public:
  Landscape(const Vec4& p, const GameParams& g,
            InitialDistribution nu0 = InitialDistribution::from_initial_actions(0.5, 0.5))
      : p_(p), g_(g), nu0_(nu0) {
    std::array<std::array<double, 3>, 16> vals;
    for (int v = 0; v < 16; ++v) {
      const auto f = multilinear_components(p, vertex_point(v));
      vals[v] = {f.f_sigma, f.numerator_y(g), f.numerator_x(g)};
    }
    field_ = MultilinearField<3>(vals);
  }

  const Vec4& p() const { return p_; }
  const GameParams& game() const { return g_; }

  // Payoff only; falls back to the Cesaro average at degenerate points.
  PayoffPair payoff(const Vec4& q) const {
    const auto e = field_.evaluate(q);
    if (std::abs(e.value[0]) < kDegenerateThreshold) return average_payoffs(p_, q, g_, nu0_);
    return {e.value[1] / e.value[0], e.value[2] / e.value[0]};
  }

  LandscapePoint evaluate(const Vec4& q) const {
    const auto e = field_.evaluate(q);
    const double den = e.value[0];
    LandscapePoint out;
    if (std::abs(den) < kDegenerateThreshold) {
      out.degenerate = true;
      out.payoff = average_payoffs(p_, q, g_, nu0_);
      out.grad_y = discounted_payoff_gradient(p_, q, g_, nu0_, kFallbackDiscount).gradient.d_pi_y;
      return out;
    }
    out.payoff = {e.value[1] / den, e.value[2] / den};
    const double den2 = den * den;
    for (int i = 0; i < 4; ++i) {
      out.grad_y[i] = (e.partial[i][1] * den - e.value[1] * e.partial[i][0]) / den2;
    }
    return out;
  }

private:
  Vec4 p_;
  GameParams g_;
  InitialDistribution nu0_;
  MultilinearField<3> field_;
};

// Discounted payoffs of Y against a fixed p as a ratio of multilinear
// functions of q: det(I - lambda M) and det(I - lambda M) * pi are both
// multilinear because each row of M depends on a single component of q.
class DiscountedLandscape {
public:
  DiscountedLandscape(const Vec4& p, const GameParams& g, double lambda,
                      InitialDistribution nu0 = InitialDistribution::from_initial_actions(0.5, 0.5))
      : p_(p), g_(g), lambda_(lambda), nu0_(nu0) {
    std::array<std::array<double, 3>, 16> vals;
    for (int v = 0; v < 16; ++v) {
      const Vec4 q = vertex_point(v);
      const TransitionMatrix t = transition_matrix(p, q);
      Mat4 a;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a[i][j] = (i == j ? 1.0 : 0.0) - lambda * t.m[i][j];
      const double det = linalg::det4(a);
      const PayoffPair pay = payoffs_from_distribution(discounted_distribution(t, nu0, lambda), g);
      vals[v] = {det, det * pay.pi_y, det * pay.pi_x};
    }
    field_ = MultilinearField<3>(vals);
  }

  double lambda() const { return lambda_; }

  PayoffPair payoff(const Vec4& q) const {
    const auto e = field_.evaluate(q);
    return {e.value[1] / e.value[0], e.value[2] / e.value[0]};
  }

  double payoff_y(const Vec4& q) const {
    const auto& c = field_.vertices();
    // Value-only fold, cheaper than the full evaluation with partials.
    std::array<double, 16> den, num;
    for (int i = 0; i < 16; ++i) {
      den[i] = c[i][0];
      num[i] = c[i][1];
    }
    int count = 16;
    for (int d = 3; d >= 0; --d) {
      const int half = count / 2;
      const double t = q[d], s = 1.0 - t;
      for (int u = 0; u < half; ++u) {
        den[u] = den[u] * s + den[u + half] * t;
        num[u] = num[u] * s + num[u + half] * t;
      }
      count = half;
    }
    return num[0] / den[0];
  }

private:
  Vec4 p_;
  GameParams g_;
  double lambda_;
  InitialDistribution nu0_;
  MultilinearField<3> field_;
};

}  // namespace payofflab
