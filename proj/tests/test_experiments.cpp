#include <catch_amalgamated.hpp>

#include "payofflab/experiments.hpp"
#include "payofflab/report.hpp"

using namespace payofflab;
using Catch::Matchers::WithinAbs;

namespace {

const GameParams kHigh{2, -1, 7, 0};
const GameParams kMid{3, 0, 5, 1};
const GameParams kLow{4, 0, 5, 3};
const Vec4 kFair{1, 0.12, 0.88, 0};

CensusOptions pga_options(unsigned threads = 1) {
  CensusOptions opt;
  opt.config.record_every = 0;
  opt.threads = threads;
  return opt;
}

RunRecord fake_run(std::int64_t id, double y, double x) {
  RunRecord r;
  r.run_id = id;
  r.payoff = {y, x};
  r.qf = {1, 1, 0.4, 0.2};
  r.form = classify_endpoint(r.qf);
  r.termination = Termination::Converged;
  return r;
}

}  // namespace

TEST_CASE("cent rounding and ranges", "[experiments]") {
  CHECK(to_cents(2.789) == 279);
  CHECK(to_cents(-0.994) == -99);
  CHECK(from_cents(267) == 2.67);
  CHECK(linspace(0, 1, 5) == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
  CHECK(linspace(3, 9, 1) == std::vector<double>{3});
  const auto radii = default_noise_radii();
  REQUIRE(radii.size() == 10);
  CHECK(radii.front() == 0.01);
  CHECK(radii.back() == 0.5);
}

TEST_CASE("clustering by rounded payoff", "[experiments]") {
  std::vector<RunRecord> runs = {fake_run(0, 2.001, 2.0), fake_run(1, 2.79, 2.791), fake_run(2, 1.999, 2.004),
                                 fake_run(3, 2.79, 2.79)};
  runs.push_back(fake_run(4, 0, 0));
  runs.back().failed = true;
  const auto clusters = cluster_runs(runs);
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].y_cents == 279);
  CHECK(clusters[0].count == 2);
  CHECK(clusters[1].rounded() == PayoffPair{2.0, 2.0});
  CHECK_THAT(clusters[0].frequency + clusters[1].frequency, WithinAbs(1.0, 1e-12));
  CHECK(clusters[0].form_histogram[static_cast<int>(EndpointClass::TopFace)] == 2);
  CHECK(suboptimal_frequency(clusters) == 0.5);
  CHECK(suboptimal_frequency({}) == 0.0);
}

TEST_CASE("census accounts for every run", "[experiments]") {
  const auto census = endpoint_distribution(kFair, kHigh, 300, 7, pga_options());
  REQUIRE(census.runs.size() == 300);
  std::int64_t total = 0;
  double freq = 0;
  for (const auto& c : census.clusters) {
    total += c.count;
    freq += c.frequency;
    CHECK(c.representatives.size() <= kMaxRepresentatives);
  }
  CHECK(total + census.failures == 300);
  CHECK_THAT(freq, WithinAbs(1.0, 1e-12));
  for (std::size_t i = 1; i < census.clusters.size(); ++i)
    CHECK(census.clusters[i - 1].y_cents >= census.clusters[i].y_cents);
  for (const auto& r : census.runs) {
    const auto* c = census.find(r.payoff.pi_y, r.payoff.pi_x);
    REQUIRE(c != nullptr);
  }
  CHECK(census.clusters.size() == 3);
}

TEST_CASE("reports do not depend on the thread count", "[experiments]") {
  const auto one = endpoint_distribution(kFair, kHigh, 64, 99, pga_options(1));
  const auto four = endpoint_distribution(kFair, kHigh, 64, 99, pga_options(4));
  auto csv = [](const EndpointCensus& c) {
    return report::to_text([&](std::ostream& os) { report::write_runs_csv(os, c.runs); }) +
           report::to_text([&](std::ostream& os) { report::write_clusters_csv(os, c.clusters); });
  };
  CHECK(csv(one) == csv(four));
  CHECK(endpoint_distribution(kFair, kHigh, 64, 100, pga_options()).runs[0].q0 != one.runs[0].q0);
}

TEST_CASE("census validates its inputs", "[experiments]") {
  CHECK_THROWS_AS(endpoint_distribution(kFair, kHigh, 0, 1), ValidationError);
  CensusOptions bad = pga_options();
  bad.config.learning_rate = -1;
  CHECK_THROWS_AS(endpoint_distribution(kFair, kHigh, 10, 1, bad), ValidationError);
}

TEST_CASE("heatmap binning", "[experiments]") {
  const std::vector<PayoffPair> same(25, PayoffPair{1.5, 2.5});
  const auto g1 = heatmap_grid(same, kMid, 10);
  CHECK(g1.nonzero() == 1);
  CHECK(g1.total == 25);
  CHECK(g1.at(5, 3) == 25);

  const std::vector<PayoffPair> corners = {{0, 0}, {5, 5}, {0, 5}, {5, 0}};
  const auto g2 = heatmap_grid(corners, kMid, 2);
  CHECK(g2.nonzero() == 4);
  CHECK_THROWS_AS(heatmap_grid(corners, kMid, 1), ValidationError);

  const auto census = endpoint_distribution(kFair, kHigh, 1000, 2024, pga_options());
  const auto grid = heatmap_grid(census, kHigh, 100);
  CHECK(grid.nonzero() == 3);
  CHECK(grid.total == 1000 - census.failures);
}

TEST_CASE("the global optimum is always found in pcZD cells", "[experiments]") {
  const auto rep = pczd_sweep(kHigh, {1, 4, 9}, 3, 60, 5, pga_options());
  REQUIRE(rep.cells.size() == 9);
  CHECK(rep.feasible_cells == 9);
  std::int64_t multi = 0;
  for (const auto& c : rep.cells) {
    REQUIRE_FALSE(c.clusters.empty());
    CHECK(std::abs(c.clusters.front().rounded().pi_y - c.global_optimum.pi_y) <= 0.01 + 1e-9);
    multi += c.multiple_endpoints() ? 1 : 0;
  }
  CHECK(multi == rep.multi_endpoint_cells);

  const auto low = pczd_sweep(kLow, {2}, 2, 30, 5, pga_options());
  for (const auto& c : low.cells) CHECK(c.multiple_endpoints());

  const auto bad = pczd_sweep(kHigh, {0.5}, 2, 10, 5, pga_options());
  CHECK(bad.feasible_cells == 0);
  CHECK_FALSE(bad.cells[0].feasible);
  CHECK_FALSE(bad.cells[0].error.empty());
}

TEST_CASE("the optimum moves with phi only in high-alternation games", "[experiments][property]") {
  for (double chi : {1.0, 3.0, 7.0}) {
    auto spread = [&](const GameParams& g) {
      double lo = 1e9, hi = -1e9;
      for (double phi : linspace(1e-4, 0.99 * phi_max(g, g.P, chi), 5)) {
        const double y = feasible_region(zd_strategy(g, {g.P, chi, phi}), g).rightmost.pi_y;
        lo = std::min(lo, y);
        hi = std::max(hi, y);
      }
      return hi - lo;
    };
    CHECK(spread(kHigh) > 0.01);
    CHECK(spread(kLow) < 0.01);
  }
}

TEST_CASE("noise sweep bookkeeping", "[experiments][lrs]") {
  CensusOptions opt = pga_options();
  opt.config.lrs_patience = 500;
  const auto rep = lrs_noise_sweep({kFair}, kHigh, {0.05, 0.2, 0.4}, 8, 3, opt);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.increments == 2);
  CHECK(rep.positive + rep.negative + rep.unchanged == rep.increments);
  const auto& row = rep.rows[0];
  REQUIRE(row.payoff_cents_sum.size() == 3);
  for (std::size_t k = 1; k < 3; ++k) {
    const auto d = row.payoff_cents_sum[k] - row.payoff_cents_sum[k - 1];
    CHECK(row.increment_sign[k - 1] == (d > 0 ? 1 : (d < 0 ? -1 : 0)));
  }
  CHECK(rep.strategies_with_3plus_decreases == 0);

  // The sums must not depend on whether per-run records are kept.
  CensusOptions lean = opt;
  lean.keep_runs = !opt.keep_runs;
  const auto other = lrs_noise_sweep({kFair}, kHigh, {0.05, 0.2, 0.4}, 8, 3, lean);
  CHECK(other.rows[0].payoff_cents_sum == row.payoff_cents_sum);
  CHECK(row.payoff_cents_sum[0] > 8 * 200);
}

TEST_CASE("trembling sweep bookkeeping", "[experiments][tremble]") {
  CensusOptions opt = pga_options();
  opt.config.max_iterations = 100'000;
  const auto reps = trembling_sweep({kLow}, 2, 6, 1e-3, 11, opt);
  REQUIRE(reps.size() == 1);
  REQUIRE(reps[0].strategies.size() == 2);
  for (const auto& s : reps[0].strategies) {
    CHECK(s.converged + s.max_iterations + s.stalled == 6);
    CHECK(s.at_global <= s.converged);
  }
  CHECK_THROWS_AS(trembling_sweep({kLow}, 1, 1, 0.0, 1), ValidationError);
}

TEST_CASE("initial strategies follow the run streams", "[experiments]") {
  Rng rng = Rng::stream(42, 3);
  CHECK(initial_strategy(42, 3) == sample_arcsine_vec(rng));
  const auto pts = rightmost_points(kMid, 10, 1);
  CHECK(pts.size() == 10);
  CHECK_THROWS_AS(rightmost_points(kMid, 0, 1), ValidationError);
}
