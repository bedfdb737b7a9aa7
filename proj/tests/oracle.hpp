#pragma once

// Reference computations used only by the tests. They work on Eigen types
// and share no code with the library's payoff or chain routines.

#include <array>
#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace oracle {

using V4 = std::array<double, 4>;

struct Game {
  double R, S, T, P;
};

// Chain over (CC, CD, DC, DD) from X's side. Y sees CD as DC and vice versa.
inline Eigen::Matrix4d chain(const V4& p, const V4& q) {
  Eigen::Matrix4d m;
  const double qy[4] = {q[0], q[2], q[1], q[3]};
  for (int s = 0; s < 4; ++s) {
    const double x = p[s], y = qy[s];
    m(s, 0) = x * y;
    m(s, 1) = x * (1 - y);
    m(s, 2) = (1 - x) * y;
    m(s, 3) = (1 - x) * (1 - y);
  }
  return m;
}

// Stationary distribution of an irreducible chain by a full-pivot LU solve.
inline Eigen::Vector4d stationary(const Eigen::Matrix4d& m) {
  Eigen::Matrix4d a = m.transpose() - Eigen::Matrix4d::Identity();
  a.row(3).setOnes();
  Eigen::Vector4d b(0, 0, 0, 1);
  return a.fullPivLu().solve(b);
}

struct Pair {
  double y, x;
};

inline Pair payoffs_from(const Eigen::Vector4d& nu, const Game& g) {
  return {nu(0) * g.R + nu(1) * g.T + nu(2) * g.S + nu(3) * g.P,
          nu(0) * g.R + nu(1) * g.S + nu(2) * g.T + nu(3) * g.P};
}

inline Pair payoffs(const V4& p, const V4& q, const Game& g) { return payoffs_from(stationary(chain(p, q)), g); }

inline Pair discounted(const V4& p, const V4& q, const Game& g, const V4& nu0, double lambda) {
  const Eigen::Matrix4d m = chain(p, q);
  const Eigen::Matrix4d a = Eigen::Matrix4d::Identity() - lambda * m.transpose();
  const Eigen::Vector4d b = (1 - lambda) * Eigen::Vector4d(nu0[0], nu0[1], nu0[2], nu0[3]);
  return payoffs_from(a.fullPivLu().solve(b), g);
}

// Central differences of the stationary payoff of Y.
inline V4 fd_gradient_y(const V4& p, const V4& q, const Game& g, double h = 1e-6) {
  V4 out;
  for (int i = 0; i < 4; ++i) {
    V4 a = q, b = q;
    a[i] += h;
    b[i] -= h;
    out[i] = (payoffs(p, a, g).y - payoffs(p, b, g).y) / (2 * h);
  }
  return out;
}

inline V4 fd_gradient_x(const V4& p, const V4& q, const Game& g, double h = 1e-6) {
  V4 out;
  for (int i = 0; i < 4; ++i) {
    V4 a = q, b = q;
    a[i] += h;
    b[i] -= h;
    out[i] = (payoffs(p, a, g).x - payoffs(p, b, g).x) / (2 * h);
  }
  return out;
}

// Time average of the chain simulated exactly on distributions (no
// sampling): mean of nu0 M^k over k = 1..n.
inline Eigen::Vector4d time_average(const Eigen::Matrix4d& m, const V4& nu0, int n) {
  Eigen::RowVector4d nu(nu0[0], nu0[1], nu0[2], nu0[3]);
  Eigen::RowVector4d acc = Eigen::RowVector4d::Zero();
  for (int k = 0; k < n; ++k) {
    nu = nu * m;
    acc += nu;
  }
  return (acc / n).transpose();
}

// Interior point with every coordinate in [lo, 1 - lo].
template <class Gen>
V4 interior(Gen& gen, double lo = 0.01) {
  std::uniform_real_distribution<double> u(lo, 1 - lo);
  return {u(gen), u(gen), u(gen), u(gen)};
}

template <class Gen>
Game random_game(Gen& gen) {
  std::uniform_real_distribution<double> u(-5, 10);
  return {u(gen), u(gen), u(gen), u(gen)};
}

// Arcsine CDF on [0, 1].
inline double arcsine_cdf(double x) { return 2.0 / M_PI * std::asin(std::sqrt(x)); }

}  // namespace oracle
