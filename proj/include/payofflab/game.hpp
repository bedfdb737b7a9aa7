#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "payofflab/errors.hpp"
#include "payofflab/rng.hpp"

namespace payofflab {

// Joint actions from the focal player's perspective, in the order used for
// every 4-vector in the library: (CC, CD, DC, DD).
enum class State : int { CC = 0, CD = 1, DC = 2, DD = 3 };

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<Vec4, 4>;

inline constexpr std::array<std::string_view, 4> kStateNames = {"cc", "cd", "dc", "dd"};

enum class Regime { Middle, HighAlternation, LowAlternation, Boundary };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Middle: return "middle";
    case Regime::HighAlternation: return "high_alternation";
    case Regime::LowAlternation: return "low_alternation";
    case Regime::Boundary: return "boundary";
  }
  return "?";
}

struct GameClass {
  bool is_ipd = false;
  Regime regime = Regime::Middle;
};

// Symmetric 2x2 game: the focal player's payoffs for CC, CD, DC, DD.
struct GameParams {
  double R = 0, S = 0, T = 0, P = 0;

  // Payoff vector of X over (CC, CD, DC, DD).
  Vec4 payoff_x() const { return {R, S, T, P}; }
  // Payoff vector of Y over the same states (X's perspective).
  Vec4 payoff_y() const { return {R, T, S, P}; }

  double min_payoff() const { return std::min({R, S, T, P}); }
  double max_payoff() const { return std::max({R, S, T, P}); }

  bool is_ipd() const { return T > R && R > P && P > S; }

  void validate() const {
    for (double v : {R, S, T, P}) {
      if (!std::isfinite(v)) throw ValidationError("game payoffs must be finite");
    }
  }

  friend bool operator==(const GameParams&, const GameParams&) = default;
};

// Regime from S+T against 2R and 2P; comparisons use payoff differences so
// the result does not depend on a common offset.
inline GameClass classify_game(const GameParams& g) {
  g.validate();
  const double vs_r = (g.S - g.R) + (g.T - g.R);
  const double vs_p = (g.S - g.P) + (g.T - g.P);
  GameClass out;
  out.is_ipd = g.is_ipd();
  if (vs_r == 0.0 || vs_p == 0.0) {
    out.regime = Regime::Boundary;
  } else if (vs_r > 0.0) {
    out.regime = Regime::HighAlternation;
  } else if (vs_p < 0.0) {
    out.regime = Regime::LowAlternation;
  } else {
    out.regime = Regime::Middle;
  }
  return out;
}

inline constexpr double kDefaultInitialCooperation = 0.5;

// Cooperation probabilities conditioned on the previous joint action, seen
// from the owner's perspective, plus an optional first-round probability.
class MemoryOneStrategy {
public:
  MemoryOneStrategy() = default;

  // No range checks; use validate_strategy for untrusted input.
  static MemoryOneStrategy unchecked(const Vec4& probs, std::optional<double> p0 = std::nullopt) {
    MemoryOneStrategy s;
    s.probs_ = probs;
    s.p0_ = p0;
    return s;
  }

  const Vec4& probs() const { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  double cc() const { return probs_[0]; }
  double cd() const { return probs_[1]; }
  double dc() const { return probs_[2]; }
  double dd() const { return probs_[3]; }

  std::optional<double> p0() const { return p0_; }
  double initial_cooperation() const { return p0_.value_or(kDefaultInitialCooperation); }

  bool is_repeat() const {
    return probs_[0] == 1.0 && probs_[1] == 1.0 && probs_[2] == 0.0 && probs_[3] == 0.0;
  }

  bool is_deterministic_component(std::size_t i) const {
    return probs_[i] == 0.0 || probs_[i] == 1.0;
  }

  friend bool operator==(const MemoryOneStrategy&, const MemoryOneStrategy&) = default;

private:
  Vec4 probs_{0.5, 0.5, 0.5, 0.5};
  std::optional<double> p0_;
};

inline MemoryOneStrategy validate_strategy(const Vec4& v, std::optional<double> p0 = std::nullopt) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (!(v[i] >= 0.0 && v[i] <= 1.0)) {
      throw ValidationError("strategy component p_" + std::string(kStateNames[i]) + " = " +
                            std::to_string(v[i]) + " is outside [0, 1]");
    }
  }
  if (p0 && !(*p0 >= 0.0 && *p0 <= 1.0)) {
    throw ValidationError("initial cooperation probability p0 = " + std::to_string(*p0) +
                          " is outside [0, 1]");
  }
  return MemoryOneStrategy::unchecked(v, p0);
}

// Long-run payoffs, Y first to match the (pi_Y, pi_X) plotting convention.
struct PayoffPair {
  double pi_y = 0;
  double pi_x = 0;

  friend bool operator==(const PayoffPair&, const PayoffPair&) = default;
};

// Beta(1/2, 1/2) draw via sin^2(pi u / 2); exact endpoints are redrawn so
// every component is strictly inside (0, 1).
inline double sample_arcsine(Rng& rng) {
  for (;;) {
    const double s = std::sin(0.5 * std::numbers::pi * rng.uniform_open());
    const double x = s * s;
    if (x > 0.0 && x < 1.0) return x;
  }
}

inline Vec4 sample_arcsine_vec(Rng& rng) {
  Vec4 v;
  for (double& c : v) c = sample_arcsine(rng);
  return v;
}

inline MemoryOneStrategy sample_arcsine_strategy(Rng& rng) {
  return MemoryOneStrategy::unchecked(sample_arcsine_vec(rng));
}

}  // namespace payofflab
