#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "payofflab/errors.hpp"
#include "payofflab/game.hpp"
#include "payofflab/markov.hpp"
#include "payofflab/payoff.hpp"

namespace payofflab {

// Components this close to 0 or 1 are snapped onto the bound.
inline constexpr double kBoundSnap = 1e-12;
inline constexpr double kRankThreshold = 1e-10;

// Parameters of the enforced relation pi_X - kappa = chi (pi_Y - kappa).
struct ZDParams {
  double kappa = 0;
  double chi = 1;
  double phi = 0;
};

namespace detail {

// ZD strategy = (1,1,0,0) + phi * zd_direction.
inline Vec4 zd_direction(const GameParams& g, double kappa, double chi) {
  return {
      -(chi - 1.0) * (g.R - kappa),
      -(kappa - g.S + chi * (g.T - kappa)),
      g.T - kappa + chi * (kappa - g.S),
      (chi - 1.0) * (kappa - g.P),
  };
}

inline Vec4 snap_into_unit_box(const Vec4& raw, const char* what) {
  Vec4 out = raw;
  std::string bad;
  for (int i = 0; i < 4; ++i) {
    if (!std::isfinite(raw[i])) {
      bad += " p_" + std::string(kStateNames[i]) + "=nan";
      continue;
    }
    if (raw[i] < 0.0 && raw[i] >= -kBoundSnap) out[i] = 0.0;
    if (raw[i] > 1.0 && raw[i] <= 1.0 + kBoundSnap) out[i] = 1.0;
    if (out[i] < 0.0 || out[i] > 1.0) bad += " p_" + std::string(kStateNames[i]) + "=" + std::to_string(raw[i]);
  }
  if (!bad.empty()) throw InfeasibleError(std::string(what) + " leaves [0,1]:" + bad);
  return out;
}

template <int Rows>
int kernel_dimension(const Eigen::Matrix<double, Rows, 4>& m) {
  Eigen::JacobiSVD<Eigen::Matrix<double, Rows, 4>> svd(m);
  const auto& sv = svd.singularValues();
  const double top = sv.size() > 0 ? sv(0) : 0.0;
  if (!(top > 0.0)) return 4;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > kRankThreshold * top) ++rank;
  return 4 - rank;
}

}  // namespace detail

inline MemoryOneStrategy zd_strategy(const GameParams& g, const ZDParams& zp) {
  g.validate();
  const Vec4 dir = detail::zd_direction(g, zp.kappa, zp.chi);
  const Vec4 raw = {1.0 + zp.phi * dir[0], 1.0 + zp.phi * dir[1], zp.phi * dir[2], zp.phi * dir[3]};
  return MemoryOneStrategy::unchecked(detail::snap_into_unit_box(raw, "ZD strategy"));
}

// Largest phi > 0 keeping every ZD component in [0,1]. The strategy is
// (1,1,0,0) + phi * d, so components starting at 1 bound phi through
// negative d and components starting at 0 through positive d.
inline double phi_max(const GameParams& g, double kappa, double chi) {
  g.validate();
  const Vec4 d = detail::zd_direction(g, kappa, chi);
  constexpr std::array<double, 4> start = {1, 1, 0, 0};
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    if (d[i] == 0.0) continue;
    const bool at_one = start[i] == 1.0;
    if ((at_one && d[i] > 0.0) || (!at_one && d[i] < 0.0)) {
      throw InfeasibleError("no phi > 0 keeps p_" + std::string(kStateNames[i]) + " in [0,1] for kappa=" +
                            std::to_string(kappa) + ", chi=" + std::to_string(chi));
    }
    best = std::min(best, 1.0 / std::abs(d[i]));
  }
  if (!std::isfinite(best)) throw InfeasibleError("ZD direction vanishes; phi is unconstrained");
  return best;
}

inline double zd_relation_residual(const MemoryOneStrategy& p, const ZDParams& zp, const MemoryOneStrategy& q,
                                   const GameParams& g) {
  const PayoffPair pay = press_dyson_payoff(p, q, g);
  return std::abs(pay.pi_x - zp.kappa - zp.chi * (pay.pi_y - zp.kappa));
}

struct Equalizer {
  MemoryOneStrategy strategy;
  double enforced_value = 0;
};

inline Equalizer equalizer_strategy(const GameParams& g, double p_cc, double p_dd) {
  g.validate();
  if (!(p_cc >= 0.0 && p_cc <= 1.0 && p_dd >= 0.0 && p_dd <= 1.0))
    throw ValidationError("equalizer p_cc and p_dd must lie in [0, 1]");
  if (g.R == g.P) throw DivisionByZeroError("equalizer undefined when R = P");
  const double weight = 1.0 - p_cc + p_dd;
  if (weight == 0.0) throw DivisionByZeroError("equalizer undefined when 1 - p_cc + p_dd = 0");
  const double span = g.R - g.P;
  const Vec4 raw = {
      p_cc,
      (p_cc * (g.T - g.P) - (1.0 + p_dd) * (g.T - g.R)) / span,
      ((1.0 - p_cc) * (g.P - g.S) + p_dd * (g.R - g.S)) / span,
      p_dd,
  };
  Equalizer e;
  e.strategy = MemoryOneStrategy::unchecked(detail::snap_into_unit_box(raw, "equalizer"));
  e.enforced_value = ((1.0 - p_cc) * g.P + p_dd * g.R) / weight;
  return e;
}

// pi_Y at q' in {eps, 1-eps}^4, indexed like MultilinearField vertices.
inline std::array<double, 16> buffered_vertex_payoffs(const Vec4& p, const GameParams& g, double eps) {
  std::array<double, 16> out;
  const auto nu0 = InitialDistribution::from_initial_actions(0.5, 0.5);
  for (int v = 0; v < 16; ++v) {
    Vec4 q;
    for (int i = 0; i < 4; ++i) q[i] = ((v >> i) & 1) ? 1.0 - eps : eps;
    const auto f = multilinear_components(p, q);
    out[v] = std::abs(f.f_sigma) < kDegenerateThreshold ? average_payoffs(p, q, g, nu0).pi_y
                                                         : f.numerator_y(g) / f.f_sigma;
  }
  return out;
}

inline bool is_equalizer(const MemoryOneStrategy& p, const GameParams& g, double eps = 0.01, double tol = 1e-9) {
  if (!(eps > 0.0 && eps < 0.5)) throw ValidationError("eps must lie in (0, 0.5)");
  const auto vals = buffered_vertex_payoffs(p.probs(), g, eps);
  const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
  return *hi - *lo < tol;
}

struct EqualizerCoefficients {
  double beta = 0;
  double gamma = 0;
};

// Least-squares fit of p = (1 + beta R + gamma, 1 + beta T + gamma,
// beta S + gamma, beta P + gamma); accepted only when it is exact.
inline std::optional<EqualizerCoefficients> equalizer_e0_solve(const Vec4& p, const GameParams& g) {
  Eigen::Matrix<double, 4, 2> a;
  a << g.R, 1, g.T, 1, g.S, 1, g.P, 1;
  Eigen::Vector4d b(p[0] - 1.0, p[1] - 1.0, p[2], p[3]);
  const Eigen::Vector2d x = a.colPivHouseholderQr().solve(b);
  const double residual = (a * x - b).norm();
  if (!(residual < 1e-9) || std::abs(x(0)) < 1e-12) return std::nullopt;
  return EqualizerCoefficients{x(0), x(1)};
}

struct GradientCoefficients {
  // Row i holds the coefficients of (R, S, T, P) in d pi_Y / d q_i.
  Eigen::Matrix4d matrix = Eigen::Matrix4d::Zero();
  int kernel_dimension = 4;
};

inline GradientCoefficients gradient_coeff_matrix(const Vec4& p, const Vec4& q) {
  const auto f = multilinear_components(p, q);
  auto as_vec = [](const MultilinearComponents& c) { return Eigen::Vector4d(c.f_cc, c.f_dc, c.f_cd, c.f_dd); };
  // f_sigma^2 times the coefficient matrix; polynomial, so defined everywhere.
  Eigen::Matrix4d scaled;
  for (int i = 0; i < 4; ++i) {
    Vec4 hi = q, lo = q;
    hi[i] = 1.0;
    lo[i] = 0.0;
    const auto fh = multilinear_components(p, hi);
    const auto fl = multilinear_components(p, lo);
    const Eigen::Vector4d df = as_vec(fh) - as_vec(fl);
    const double dsig = fh.f_sigma - fl.f_sigma;
    scaled.row(i) = (df * f.f_sigma - as_vec(f) * dsig).transpose();
  }
  GradientCoefficients out;
  if (std::abs(f.f_sigma) < kDegenerateThreshold) {
    if (scaled.cwiseAbs().maxCoeff() < 1e-14) return out;
    throw DegenerateChainError("gradient coefficients undefined: stationary distribution is not unique");
  }
  out.matrix = scaled / (f.f_sigma * f.f_sigma);
  out.kernel_dimension = detail::kernel_dimension<4>(out.matrix);
  return out;
}

struct BoundaryCoefficients {
  // Row for q in {eps,1-eps}^4 minus the all-eps vertex: coefficients of
  // (R, S, T, P) in pi_Y(p, q) - pi_Y(p, (eps,eps,eps,eps)).
  Eigen::Matrix<double, 15, 4> matrix = Eigen::Matrix<double, 15, 4>::Zero();
  int kernel_dimension = 4;
};

inline BoundaryCoefficients boundary_payoff_matrix(const Vec4& p, double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw ValidationError("eps must lie in (0, 0.5)");
  const auto nu0 = InitialDistribution::from_initial_actions(0.5, 0.5);
  // Y's payoff is <c, (R,S,T,P)> with c = (nu_CC, nu_DC, nu_CD, nu_DD).
  auto coeffs = [&](const Vec4& q) -> Eigen::Vector4d {
    const auto f = multilinear_components(p, q);
    if (std::abs(f.f_sigma) >= kDegenerateThreshold)
      return Eigen::Vector4d(f.f_cc, f.f_dc, f.f_cd, f.f_dd) / f.f_sigma;
    const Vec4 nu = long_run_distribution(transition_matrix(p, q), nu0);
    return Eigen::Vector4d(nu[0], nu[2], nu[1], nu[3]);
  };
  auto corner = [&](int v) {
    Vec4 q;
    for (int i = 0; i < 4; ++i) q[i] = ((v >> i) & 1) ? 1.0 - eps : eps;
    return q;
  };
  const Eigen::Vector4d base = coeffs(corner(0));
  BoundaryCoefficients out;
  for (int v = 1; v < 16; ++v) out.matrix.row(v - 1) = (coeffs(corner(v)) - base).transpose();
  out.kernel_dimension = detail::kernel_dimension<15>(out.matrix);
  return out;
}

// Sufficient conditions for a non-negative payoff gradient against a pcZD
// strategy, evaluated on payoffs rescaled by Z -> (Z - P) / (R - P).
struct ConditionReport {
  double rescaled_s = 0, rescaled_t = 0;
  std::optional<bool> cc_at_least_cd;       // p_CC >= p_CD
  std::optional<bool> dc_at_least_dd;       // p_DC >= p_DD
  bool sum_in_range = false;                // 0 <= S' + T' <= 2
  std::optional<double> prefactor;          // 1 - p_CD - (1 - p_CC) S' + p_DD (1 - S')
  std::optional<bool> prefactor_nonnegative;
  std::optional<double> zd_first;           // chi (T' - 1) + (1 - S')
  std::optional<double> zd_second;          // T' - chi S'
  bool covered = false;
};

inline ConditionReport chen_zinger_conditions(const GameParams& g, std::optional<Vec4> p = std::nullopt,
                                              std::optional<double> chi = std::nullopt) {
  g.validate();
  if (g.R == g.P) throw ValidationError("rescaling requires R != P");
  ConditionReport r;
  const double span = g.R - g.P;
  r.rescaled_s = (g.S - g.P) / span;
  r.rescaled_t = (g.T - g.P) / span;
  const double sum = r.rescaled_s + r.rescaled_t;
  r.sum_in_range = sum >= 0.0 && sum <= 2.0;
  bool ok = r.sum_in_range;
  if (p) {
    const Vec4& v = *p;
    r.cc_at_least_cd = v[0] >= v[1];
    r.dc_at_least_dd = v[2] >= v[3];
    r.prefactor = 1.0 - v[1] - (1.0 - v[0]) * r.rescaled_s + v[3] * (1.0 - r.rescaled_s);
    r.prefactor_nonnegative = *r.prefactor >= 0.0;
    ok = ok && *r.cc_at_least_cd && *r.dc_at_least_dd && *r.prefactor_nonnegative;
  }
  if (chi) {
    r.zd_first = *chi * (r.rescaled_t - 1.0) + (1.0 - r.rescaled_s);
    r.zd_second = r.rescaled_t - *chi * r.rescaled_s;
    ok = ok && *r.zd_first >= 0.0 && *r.zd_second >= 0.0;
  }
  r.covered = ok;
  return r;
}

}  // namespace payofflab
