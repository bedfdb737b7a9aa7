#include <catch_amalgamated.hpp>

#include <random>

#include "oracle.hpp"
#include "payofflab/payoff.hpp"
#include "payofflab/zd.hpp"

using namespace payofflab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Vec4 v4(const oracle::V4& a) { return {a[0], a[1], a[2], a[3]}; }
GameParams game(const oracle::Game& g) { return {g.R, g.S, g.T, g.P}; }

}  // namespace

TEST_CASE("Press-Dyson payoff of mutual cooperation is R", "[payoff]") {
  for (const GameParams g : {GameParams{3, 0, 5, 1}, GameParams{2, -1, 7, 0}, GameParams{4, 0, 5, 3}}) {
    const auto pay = press_dyson_payoff(Vec4{1, 1, 1, 1}, Vec4{1, 1, 1, 1}, g);
    CHECK_THAT(pay.pi_y, WithinAbs(g.R, 1e-15));
    CHECK_THAT(pay.pi_x, WithinAbs(g.R, 1e-15));
  }
  const auto f = multilinear_components(Vec4{1, 1, 1, 1}, Vec4{1, 1, 1, 1});
  CHECK(f.f_cc == 1.0);
  CHECK(f.f_dc == 0.0);
  CHECK(f.f_cd == 0.0);
  CHECK(f.f_dd == 0.0);
  CHECK(f.f_sigma == 1.0);
}

TEST_CASE("win-stay lose-shift against the fig4b preset strategy", "[payoff]") {
  const auto pay = press_dyson_payoff(Vec4{0.860, 0, 0.225, 0.252}, Vec4{1, 0, 0, 1}, {3, 0, 5, 1});
  CHECK(std::llround(pay.pi_y * 100) == 187);
  CHECK(std::llround(pay.pi_x * 100) == 283);
}

TEST_CASE("Press-Dyson payoffs agree with the stationary solve", "[payoff][oracle]") {
  std::mt19937_64 gen(101);
  for (int i = 0; i < 1000; ++i) {
    const auto p = oracle::interior(gen), q = oracle::interior(gen);
    const auto og = oracle::random_game(gen);
    const auto want = oracle::payoffs(p, q, og);
    const auto got = press_dyson_payoff(v4(p), v4(q), game(og));
    CHECK_THAT(got.pi_y, WithinAbs(want.y, 1e-9));
    CHECK_THAT(got.pi_x, WithinAbs(want.x, 1e-9));

    const auto f = multilinear_components(v4(p), v4(q));
    const Vec4 nu = f.distribution();
    const auto onu = oracle::stationary(oracle::chain(p, q));
    for (int s = 0; s < 4; ++s) CHECK_THAT(nu[s], WithinAbs(onu(s), 1e-9));
    const double den = linalg::det4(press_dyson_matrix(v4(p), v4(q), {1, 1, 1, 1}));
    CHECK_THAT(f.f_sigma, WithinAbs(den, 1e-10));
  }
}

TEST_CASE("the landscape reproduces direct evaluation", "[payoff]") {
  std::mt19937_64 gen(7);
  for (int k = 0; k < 20; ++k) {
    const auto p = oracle::interior(gen);
    const auto og = oracle::random_game(gen);
    const Landscape land(v4(p), game(og));
    for (int i = 0; i < 50; ++i) {
      const auto q = oracle::interior(gen);
      const auto pt = land.evaluate(v4(q));
      const auto pay = press_dyson_payoff(v4(p), v4(q), game(og));
      const auto grad = payoff_gradient(v4(p), v4(q), game(og));
      CHECK_FALSE(pt.degenerate);
      CHECK_THAT(pt.payoff.pi_y, WithinAbs(pay.pi_y, 1e-9));
      CHECK_THAT(pt.payoff.pi_x, WithinAbs(pay.pi_x, 1e-9));
      for (int c = 0; c < 4; ++c) CHECK_THAT(pt.grad_y[c], WithinAbs(grad.d_pi_y[c], 1e-7));
    }
  }
}

TEST_CASE("analytic gradient matches central differences", "[payoff][oracle]") {
  std::mt19937_64 gen(202);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = oracle::interior(gen, 0.05), q = oracle::interior(gen, 0.05);
    const auto og = oracle::random_game(gen);
    const auto grad = payoff_gradient(v4(p), v4(q), game(og));
    const auto fy = oracle::fd_gradient_y(p, q, og);
    const auto fx = oracle::fd_gradient_x(p, q, og);
    for (int c = 0; c < 4; ++c) {
      const double sy = std::max(1.0, std::abs(fy[c]));
      const double sx = std::max(1.0, std::abs(fx[c]));
      CHECK(std::abs(grad.d_pi_y[c] - fy[c]) / sy < 1e-6);
      CHECK(std::abs(grad.d_pi_x[c] - fx[c]) / sx < 1e-6);
      ++checked;
    }
  }
  CHECK(checked == 4000);
}

TEST_CASE("gradient signs at the negative-derivative point", "[payoff]") {
  const auto grad = payoff_gradient(Vec4{1, 0.12, 0.88, 0}, Vec4{0.08, 0.77, 0.95, 0.68}, {2, -1, 7, 0});
  CHECK(grad.d_pi_y[0] < 0.0);
  CHECK(grad.d_pi_y[1] < 0.0);
}

TEST_CASE("equalizers flatten the landscape", "[payoff][zd]") {
  const auto eq = equalizer_strategy({3, 0, 5, 1}, 0.7, 0.05);
  std::mt19937_64 gen(9);
  for (int i = 0; i < 200; ++i) {
    const auto q = oracle::interior(gen);
    const auto grad = payoff_gradient(eq.strategy.probs(), v4(q), {3, 0, 5, 1});
    for (double d : grad.d_pi_y) CHECK_THAT(d, WithinAbs(0.0, 1e-9));
  }
}

TEST_CASE("ZD strategies align the two gradients", "[payoff][zd]") {
  const GameParams g{2, -1, 7, 0};
  std::mt19937_64 gen(4);
  for (double chi : {1.0, 2.0, 5.0}) {
    const double phi = 0.5 * phi_max(g, 0.0, chi);
    const auto p = zd_strategy(g, {0.0, chi, phi});
    for (int i = 0; i < 50; ++i) {
      const auto q = oracle::interior(gen);
      const auto grad = payoff_gradient(p.probs(), v4(q), g);
      for (int c = 0; c < 4; ++c) CHECK_THAT(grad.d_pi_x[c], WithinAbs(chi * grad.d_pi_y[c], 1e-8));
    }
  }
}

TEST_CASE("payoff is monotone along each coordinate section", "[payoff][property]") {
  // Numerator and denominator are affine in each q_i, so pi_Y restricted to
  // a coordinate line is a Mobius map and cannot change direction.
  std::mt19937_64 gen(31);
  for (int k = 0; k < 100; ++k) {
    const auto p = oracle::interior(gen, 0.05);
    const auto og = oracle::random_game(gen);
    const Landscape land(v4(p), game(og));
    auto q = v4(oracle::interior(gen, 0.05));
    const int axis = k % 4;
    int sign = 0;
    bool flipped = false;
    double prev = 0;
    for (int s = 0; s <= 50; ++s) {
      q[axis] = 0.02 + 0.96 * s / 50.0;
      const double v = land.payoff(q).pi_y;
      if (s > 0) {
        const double d = v - prev;
        if (std::abs(d) > 1e-12) {
          const int now = d > 0 ? 1 : -1;
          if (sign != 0 && now != sign) flipped = true;
          sign = now;
        }
      }
      prev = v;
    }
    CHECK_FALSE(flipped);
  }
}

TEST_CASE("degenerate chains are reported", "[payoff]") {
  const Vec4 tft{1, 0, 1, 0};
  CHECK_THROWS_AS(press_dyson_payoff(tft, tft, {3, 0, 5, 1}), DegenerateChainError);
  CHECK_THROWS_AS(payoff_gradient(tft, tft, {3, 0, 5, 1}), DegenerateChainError);

  const Landscape land(tft, {3, 0, 5, 1});
  const auto pt = land.evaluate(tft);
  CHECK(pt.degenerate);
  CHECK_THAT(pt.payoff.pi_y, WithinAbs(0.25 * 3 + 0.5 * 2.5 + 0.25 * 1, 1e-12));
  for (double d : pt.grad_y) CHECK(std::isfinite(d));
}

TEST_CASE("discounted gradient matches differences of discounted payoffs", "[payoff]") {
  std::mt19937_64 gen(17);
  const auto nu0 = InitialDistribution::from_initial_actions(0.5, 0.5);
  for (int i = 0; i < 100; ++i) {
    const auto p = oracle::interior(gen, 0.05), q = oracle::interior(gen, 0.05);
    const auto og = oracle::random_game(gen);
    const double lambda = 0.9;
    const auto got = discounted_payoff_gradient(v4(p), v4(q), game(og), nu0, lambda);
    for (int c = 0; c < 4; ++c) {
      auto a = q, b = q;
      a[c] += 1e-6;
      b[c] -= 1e-6;
      const double fd = (oracle::discounted(p, a, og, {0.25, 0.25, 0.25, 0.25}, lambda).y -
                         oracle::discounted(p, b, og, {0.25, 0.25, 0.25, 0.25}, lambda).y) /
                        2e-6;
      CHECK_THAT(got.gradient.d_pi_y[c], WithinAbs(fd, 1e-6 * std::max(1.0, std::abs(fd))));
    }
  }
}

TEST_CASE("discounted landscape agrees with the linear solve", "[payoff]") {
  std::mt19937_64 gen(23);
  for (int k = 0; k < 20; ++k) {
    const auto p = oracle::interior(gen, 0.0);
    const auto og = oracle::random_game(gen);
    const DiscountedLandscape land(v4(p), game(og), 0.9999);
    for (int i = 0; i < 20; ++i) {
      const auto q = oracle::interior(gen, 0.0);
      const auto want = oracle::discounted(p, q, og, {0.25, 0.25, 0.25, 0.25}, 0.9999);
      CHECK_THAT(land.payoff(v4(q)).pi_y, WithinAbs(want.y, 1e-8));
      CHECK_THAT(land.payoff(v4(q)).pi_x, WithinAbs(want.x, 1e-8));
      CHECK_THAT(land.payoff_y(v4(q)), WithinAbs(want.y, 1e-8));
    }
  }
}
