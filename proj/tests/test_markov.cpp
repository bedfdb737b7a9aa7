#include <catch_amalgamated.hpp>

#include <random>

#include "oracle.hpp"
#include "payofflab/markov.hpp"

using namespace payofflab;
using Catch::Matchers::WithinAbs;

namespace {

oracle::V4 to_oracle(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

void check_row(const TransitionMatrix& t, int row, const Vec4& expected) {
  for (int j = 0; j < 4; ++j) CHECK_THAT(t.m[row][j], WithinAbs(expected[j], 1e-15));
}

}  // namespace

TEST_CASE("transition matrix rows", "[markov]") {
  const auto allc = transition_matrix(Vec4{1, 1, 1, 1}, Vec4{1, 1, 1, 1});
  for (int r = 0; r < 4; ++r) check_row(allc, r, {1, 0, 0, 0});

  const auto alld = transition_matrix(Vec4{0, 0, 0, 0}, Vec4{0, 0, 0, 0});
  for (int r = 0; r < 4; ++r) check_row(alld, r, {0, 0, 0, 1});

  // Row CD: X cooperated, Y defected, so Y reacts with q_DC = 1 and X with
  // p_CD = 0.
  const auto alt = transition_matrix(Vec4{1, 0, 1, 0}, Vec4{1, 0, 1, 0});
  check_row(alt, 1, {0, 0, 1, 0});
  check_row(alt, 2, {0, 1, 0, 0});
}

TEST_CASE("transition matrix matches the oracle chain", "[markov][property]") {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 200; ++i) {
    const auto p = oracle::interior(gen, 0.0), q = oracle::interior(gen, 0.0);
    const auto t = transition_matrix(Vec4{p[0], p[1], p[2], p[3]}, Vec4{q[0], q[1], q[2], q[3]});
    const auto m = oracle::chain(p, q);
    for (int r = 0; r < 4; ++r) {
      double row = 0;
      for (int c = 0; c < 4; ++c) {
        CHECK_THAT(t.m[r][c], WithinAbs(m(r, c), 1e-15));
        row += t.m[r][c];
      }
      CHECK_THAT(row, WithinAbs(1.0, 1e-12));
    }
  }
}

TEST_CASE("stationary set of simple chains", "[markov]") {
  const auto allc = stationary_set(transition_matrix(Vec4{1, 1, 1, 1}, Vec4{1, 1, 1, 1}));
  REQUIRE(allc.unique());
  CHECK(allc.classes[0].nu == Vec4{1, 0, 0, 0});

  const auto tft = stationary_set(transition_matrix(Vec4{1, 0, 1, 0}, Vec4{1, 0, 1, 0}));
  CHECK_FALSE(tft.unique());
  REQUIRE(tft.classes.size() == 3);
  std::vector<std::uint8_t> masks;
  for (const auto& c : tft.classes) masks.push_back(c.states);
  std::sort(masks.begin(), masks.end());
  CHECK(masks == std::vector<std::uint8_t>{0b0001, 0b0110, 0b1000});
  for (const auto& c : tft.classes) {
    if (c.states == 0b0110) {
      CHECK_THAT(c.nu[1], WithinAbs(0.5, 1e-15));
      CHECK_THAT(c.nu[2], WithinAbs(0.5, 1e-15));
    }
  }

  // Two repeaters never change anything: every state is absorbing.
  const auto rep = stationary_set(transition_matrix(Vec4{1, 1, 0, 0}, Vec4{1, 1, 0, 0}));
  CHECK(rep.classes.size() == 4);
}

TEST_CASE("stationary distributions of random interior chains", "[markov][property]") {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 500; ++i) {
    const auto p = oracle::interior(gen), q = oracle::interior(gen);
    const auto t = transition_matrix(Vec4{p[0], p[1], p[2], p[3]}, Vec4{q[0], q[1], q[2], q[3]});
    const auto set = stationary_set(t);
    REQUIRE(set.unique());
    const Vec4 nu = set.classes[0].nu;
    const auto expected = oracle::stationary(oracle::chain(p, q));
    double sum = 0;
    for (int s = 0; s < 4; ++s) {
      CHECK(nu[s] > 0.0);
      CHECK_THAT(nu[s], WithinAbs(expected(s), 1e-10));
      sum += nu[s];
      double image = 0;
      for (int r = 0; r < 4; ++r) image += nu[r] * t.m[r][s];
      CHECK_THAT(image, WithinAbs(nu[s], 1e-10));
    }
    CHECK_THAT(sum, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("Cesaro limit", "[markov]") {
  const auto allc = cesaro_limit(transition_matrix(Vec4{1, 1, 1, 1}, Vec4{1, 1, 1, 1}));
  for (int r = 0; r < 4; ++r) CHECK(allc[r] == Vec4{1, 0, 0, 0});

  // Alternators swap CD and DC every round.
  const auto cyc = cesaro_limit(transition_matrix(Vec4{0, 0, 1, 1}, Vec4{0, 0, 1, 1}));
  for (int r : {1, 2}) {
    CHECK_THAT(cyc[r][0], WithinAbs(0.0, 1e-12));
    CHECK_THAT(cyc[r][1], WithinAbs(0.5, 1e-12));
    CHECK_THAT(cyc[r][2], WithinAbs(0.5, 1e-12));
    CHECK_THAT(cyc[r][3], WithinAbs(0.0, 1e-12));
  }

  std::mt19937_64 gen(3);
  for (int i = 0; i < 100; ++i) {
    const auto p = oracle::interior(gen), q = oracle::interior(gen);
    const auto t = transition_matrix(Vec4{p[0], p[1], p[2], p[3]}, Vec4{q[0], q[1], q[2], q[3]});
    const Mat4 lim = cesaro_limit(t);
    const auto nu = oracle::stationary(oracle::chain(p, q));
    const Mat4 again = linalg::multiply(lim, t.m);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        CHECK_THAT(lim[r][c], WithinAbs(nu(c), 1e-8));
        CHECK_THAT(again[r][c], WithinAbs(lim[r][c], 1e-8));
      }
  }
}

TEST_CASE("Cesaro limit agrees with a brute-force time average on reducible chains", "[markov]") {
  // Periodic class {CD, DC} plus absorbing CC reachable from DD.
  const Vec4 p{1, 0, 1, 0.5}, q{1, 0, 1, 0.5};
  const auto t = transition_matrix(p, q);
  const Mat4 lim = cesaro_limit(t);
  const oracle::V4 nu0{0.1, 0.2, 0.3, 0.4};
  const auto avg = oracle::time_average(oracle::chain(to_oracle(p), to_oracle(q)), nu0, 200000);
  const Vec4 got = linalg::row_times({0.1, 0.2, 0.3, 0.4}, lim);
  for (int s = 0; s < 4; ++s) CHECK_THAT(got[s], WithinAbs(avg(s), 1e-4));
}

TEST_CASE("powers stay row-stochastic", "[markov][property]") {
  std::mt19937_64 gen(8);
  const auto p = oracle::interior(gen, 0.0), q = oracle::interior(gen, 0.0);
  const auto t = transition_matrix(Vec4{p[0], p[1], p[2], p[3]}, Vec4{q[0], q[1], q[2], q[3]});
  Mat4 power = t.m;
  for (int k = 1; k <= 64; ++k) {
    for (const auto& row : power) CHECK_THAT(row[0] + row[1] + row[2] + row[3], WithinAbs(1.0, 1e-10));
    power = linalg::multiply(power, t.m);
  }
}

TEST_CASE("average payoffs", "[markov]") {
  const GameParams ipd{3, 0, 5, 1};
  const auto cc = average_payoffs(validate_strategy({1, 1, 1, 1}), validate_strategy({1, 1, 1, 1}), ipd);
  CHECK(cc == PayoffPair{3, 3});

  const GameParams low{4, 0, 5, 3};
  const auto fair = validate_strategy({1, 0.85, 0.15, 0});
  const auto d = average_payoffs(fair, validate_strategy({0, 0, 0, 0}), low);
  CHECK_THAT(d.pi_y, WithinAbs(3.0, 1e-12));
  CHECK_THAT(d.pi_x, WithinAbs(3.0, 1e-12));
  const auto c = average_payoffs(fair, validate_strategy({1, 1, 1, 1}), low);
  CHECK_THAT(c.pi_y, WithinAbs(4.0, 1e-12));
  CHECK_THAT(c.pi_x, WithinAbs(4.0, 1e-12));

  const auto alt = average_payoffs(Vec4{0, 0, 1, 1}, Vec4{0, 0, 1, 1}, {2, -1, 7, 0}, InitialDistribution{{0, 1, 0, 0}});
  CHECK_THAT(alt.pi_y, WithinAbs(3.0, 1e-12));
  CHECK_THAT(alt.pi_x, WithinAbs(3.0, 1e-12));
}

TEST_CASE("non-unique chains use the initial distribution", "[markov]") {
  const GameParams g{3, 0, 5, 1};
  const auto tft = validate_strategy({1, 0, 1, 0});
  const auto start_cc = average_payoffs(tft, tft, g, InitialDistribution{{1, 0, 0, 0}});
  CHECK(start_cc == PayoffPair{3, 3});
  const auto mixed = average_payoffs(tft, tft, g);
  // From p0 = q0 = 0.5: a quarter each in CC and DD, half in the CD/DC cycle.
  CHECK_THAT(mixed.pi_y, WithinAbs(0.25 * 3 + 0.5 * 2.5 + 0.25 * 1, 1e-12));
}

TEST_CASE("discounted payoffs", "[markov]") {
  const GameParams g{3, 0, 5, 1};
  const auto nu0 = InitialDistribution::from_initial_actions(0.5, 0.5);
  for (double lambda : {0.1, 0.5, 0.99}) {
    const auto cc = discounted_payoffs(Vec4{1, 1, 1, 1}, Vec4{1, 1, 1, 1}, g, InitialDistribution{{1, 0, 0, 0}}, lambda);
    CHECK_THAT(cc.pi_y, WithinAbs(3.0, 1e-12));
    CHECK_THAT(cc.pi_x, WithinAbs(3.0, 1e-12));
  }
  const auto alt = discounted_payoffs(Vec4{0, 0, 1, 1}, Vec4{0, 0, 1, 1}, {4, 0, 5, 3}, InitialDistribution{{0, 1, 0, 0}}, 0.9999);
  CHECK_THAT(alt.pi_y, WithinAbs(2.5, 1e-3));
  CHECK_THAT(alt.pi_x, WithinAbs(2.5, 1e-3));

  CHECK_THROWS_AS(discounted_payoffs(Vec4{0, 0, 1, 1}, Vec4{0, 0, 1, 1}, g, nu0, 1.0), ValidationError);
  CHECK_THROWS_AS(InitialDistribution::validated({0.5, 0.5, 0.5, 0}), ValidationError);

  std::mt19937_64 gen(13);
  const oracle::Game games[] = {{2, -1, 7, 0}, {3, 0, 5, 1}, {4, 0, 5, 3}};
  for (int i = 0; i < 300; ++i) {
    const auto p = oracle::interior(gen), q = oracle::interior(gen);
    const auto og = games[i % 3];
    const GameParams gg{og.R, og.S, og.T, og.P};
    const Vec4 pv{p[0], p[1], p[2], p[3]}, qv{q[0], q[1], q[2], q[3]};
    const auto avg = oracle::payoffs(p, q, og);
    const auto disc = discounted_payoffs(pv, qv, gg, nu0, 0.9999);
    CHECK_THAT(disc.pi_y, WithinAbs(avg.y, 1e-3));
    CHECK_THAT(disc.pi_x, WithinAbs(avg.x, 1e-3));
    const auto exact = oracle::discounted(p, q, og, {0.25, 0.25, 0.25, 0.25}, 0.7);
    const auto lib = discounted_payoffs(pv, qv, gg, nu0, 0.7);
    CHECK_THAT(lib.pi_y, WithinAbs(exact.y, 1e-10));
    CHECK_THAT(lib.pi_x, WithinAbs(exact.x, 1e-10));
  }
}

TEST_CASE("discounting converges to the long-run average at rate 1 - lambda", "[markov][property]") {
  std::mt19937_64 gen(21);
  const auto nu0 = InitialDistribution::from_initial_actions(0.5, 0.5);
  const GameParams g{3, 0, 5, 1};
  for (int i = 0; i < 50; ++i) {
    const auto p = oracle::interior(gen, 0.05), q = oracle::interior(gen, 0.05);
    const Vec4 pv{p[0], p[1], p[2], p[3]}, qv{q[0], q[1], q[2], q[3]};
    const auto avg = average_payoffs(pv, qv, g, nu0);
    for (double gap : {1e-2, 1e-3, 1e-4}) {
      const auto d = discounted_payoffs(pv, qv, g, nu0, 1 - gap);
      CHECK(std::abs(d.pi_y - avg.pi_y) < 100 * gap);
    }
  }
}
