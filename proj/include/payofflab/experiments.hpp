#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "payofflab/game.hpp"
#include "payofflab/learn.hpp"
#include "payofflab/parallel.hpp"
#include "payofflab/payoff.hpp"
#include "payofflab/region.hpp"
#include "payofflab/rng.hpp"
#include "payofflab/zd.hpp"

namespace payofflab {

enum class LearnerKind { PGA, LRS };

inline std::string_view to_string(LearnerKind k) { return k == LearnerKind::PGA ? "pga" : "lrs"; }

// Payoff rounded to two decimals, kept as integer hundredths so cluster
// keys compare exactly.
inline std::int64_t to_cents(double v) { return std::llround(v * 100.0); }
inline double from_cents(std::int64_t c) { return static_cast<double>(c) / 100.0; }

struct RunRecord {
  std::int64_t run_id = 0;
  Vec4 q0{};
  Vec4 qf{};
  PayoffPair payoff;  // long-run payoff of the final strategy, no trembling
  std::int64_t steps = 0;
  Termination termination = Termination::MaxIterations;
  EndpointForm form;
  bool failed = false;
  std::string error;

  std::int64_t y_cents() const { return to_cents(payoff.pi_y); }
  std::int64_t x_cents() const { return to_cents(payoff.pi_x); }
};

inline constexpr std::size_t kMaxRepresentatives = 5;

struct EndpointCluster {
  std::int64_t y_cents = 0, x_cents = 0;
  std::int64_t count = 0;
  double frequency = 0;
  std::vector<Vec4> representatives;
  std::array<std::int64_t, 5> form_histogram{};  // indexed by EndpointClass

  PayoffPair rounded() const { return {from_cents(y_cents), from_cents(x_cents)}; }
};

struct EndpointCensus {
  std::vector<RunRecord> runs;
  std::vector<EndpointCluster> clusters;  // descending pi_Y, then pi_X
  std::int64_t failures = 0;

  const EndpointCluster* find(double pi_y, double pi_x) const {
    for (const auto& c : clusters)
      if (c.y_cents == to_cents(pi_y) && c.x_cents == to_cents(pi_x)) return &c;
    return nullptr;
  }
};

struct CensusOptions {
  LearnerKind learner = LearnerKind::PGA;
  LearnerConfig config{};
  unsigned threads = 1;
  bool keep_runs = true;
};

// Groups runs by rounded payoff pair. Failed runs are counted separately.
inline std::vector<EndpointCluster> cluster_runs(const std::vector<RunRecord>& runs) {
  std::map<std::pair<std::int64_t, std::int64_t>, EndpointCluster> by_key;
  std::int64_t ok = 0;
  for (const auto& r : runs) {
    if (r.failed) continue;
    ++ok;
    auto& c = by_key[{r.y_cents(), r.x_cents()}];
    c.y_cents = r.y_cents();
    c.x_cents = r.x_cents();
    ++c.count;
    if (c.representatives.size() < kMaxRepresentatives) c.representatives.push_back(r.qf);
    ++c.form_histogram[static_cast<int>(r.form.classification)];
  }
  std::vector<EndpointCluster> out;
  for (auto& [key, c] : by_key) {
    c.frequency = ok > 0 ? static_cast<double>(c.count) / static_cast<double>(ok) : 0.0;
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const EndpointCluster& a, const EndpointCluster& b) {
    return a.y_cents != b.y_cents ? a.y_cents > b.y_cents : a.x_cents > b.x_cents;
  });
  return out;
}

// One learner run from the arcsine initial strategy of stream (seed, index).
inline RunRecord single_run(const Landscape& land, const DiscountedLandscape* disc, std::uint64_t seed,
                            std::int64_t index, const CensusOptions& opt) {
  RunRecord rec;
  rec.run_id = index;
  Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(index));
  rec.q0 = sample_arcsine_vec(rng);
  try {
    const Trajectory tr =
        opt.learner == LearnerKind::PGA ? pga_run(land, rec.q0, opt.config) : lrs_run(*disc, rec.q0, opt.config, rng);
    rec.qf = tr.endpoint;
    rec.steps = tr.steps;
    rec.termination = tr.termination;
    rec.payoff = land.payoff(tr.endpoint);
    rec.form = classify_endpoint(tr.endpoint);
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  return rec;
}

inline EndpointCensus endpoint_distribution(const Vec4& p, const GameParams& g, std::int64_t n_samples,
                                            std::uint64_t seed, const CensusOptions& opt = {}) {
  if (n_samples < 1) throw ValidationError("n_samples must be at least 1");
  g.validate();
  opt.config.validate();
  LearnerConfig cfg = opt.config;
  const Landscape land(p, g);
  std::optional<DiscountedLandscape> disc;
  if (opt.learner == LearnerKind::LRS) disc.emplace(p, g, cfg.lrs_discount);
  CensusOptions run_opt = opt;
  run_opt.config = cfg;

  EndpointCensus census;
  census.runs.resize(static_cast<std::size_t>(n_samples));
  parallel_for(census.runs.size(), opt.threads, [&](std::size_t i) {
    census.runs[i] = single_run(land, disc ? &*disc : nullptr, seed, static_cast<std::int64_t>(i), run_opt);
  });
  for (const auto& r : census.runs) census.failures += r.failed ? 1 : 0;
  census.clusters = cluster_runs(census.runs);
  if (!opt.keep_runs) census.runs.clear();
  return census;
}

// Fraction of runs outside the highest-payoff cluster.
inline double suboptimal_frequency(const std::vector<EndpointCluster>& clusters) {
  if (clusters.empty()) return 0.0;
  return 1.0 - clusters.front().frequency;
}

struct SweepCell {
  double chi = 0, phi = 0;
  Vec4 p{};
  bool feasible = true;
  std::string error;
  std::vector<EndpointCluster> clusters;
  double suboptimal_frequency = 0;
  PayoffPair global_optimum;  // rightmost point of the feasible region

  bool multiple_endpoints() const { return clusters.size() > 1; }
};

struct SweepReport {
  GameParams game;
  std::vector<SweepCell> cells;
  std::int64_t feasible_cells = 0;
  std::int64_t multi_endpoint_cells = 0;
  double mean_suboptimal_frequency = 0;  // over multi-endpoint cells
};

inline std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> v;
  if (count == 1) return {lo};
  for (int i = 0; i < count; ++i) v.push_back(lo + (hi - lo) * i / (count - 1));
  return v;
}

// Endpoint census for pcZD strategies with kappa = P over a (chi, phi) grid;
// phi is linearly spaced in [1e-4, 0.99 phi_max].
inline SweepReport pczd_sweep(const GameParams& g, const std::vector<double>& chi_values, int phi_count,
                              std::int64_t n_q0, std::uint64_t seed, const CensusOptions& opt = {}) {
  if (phi_count < 1) throw ValidationError("phi_count must be at least 1");
  SweepReport rep;
  rep.game = g;
  std::uint64_t cell_index = 0;
  for (double chi : chi_values) {
    double top = 0;
    std::string err;
    try {
      top = phi_max(g, g.P, chi);
    } catch (const InfeasibleError& e) {
      err = e.what();
    }
    for (int k = 0; k < phi_count; ++k, ++cell_index) {
      SweepCell cell;
      cell.chi = chi;
      if (!err.empty()) {
        cell.feasible = false;
        cell.error = err;
        rep.cells.push_back(std::move(cell));
        continue;
      }
      cell.phi = linspace(1e-4, 0.99 * top, phi_count)[static_cast<std::size_t>(k)];
      try {
        cell.p = zd_strategy(g, {g.P, chi, cell.phi}).probs();
      } catch (const Error& e) {
        cell.feasible = false;
        cell.error = e.what();
        rep.cells.push_back(std::move(cell));
        continue;
      }
      CensusOptions cell_opt = opt;
      cell_opt.keep_runs = false;
      const auto census = endpoint_distribution(cell.p, g, n_q0, stream_seed(seed, cell_index), cell_opt);
      cell.clusters = census.clusters;
      cell.suboptimal_frequency = suboptimal_frequency(cell.clusters);
      cell.global_optimum = feasible_region(cell.p, g).rightmost;
      rep.cells.push_back(std::move(cell));
    }
  }
  double sum = 0;
  for (const auto& c : rep.cells) {
    if (!c.feasible) continue;
    ++rep.feasible_cells;
    if (c.multiple_endpoints()) {
      ++rep.multi_endpoint_cells;
      sum += c.suboptimal_frequency;
    }
  }
  rep.mean_suboptimal_frequency = rep.multi_endpoint_cells > 0 ? sum / rep.multi_endpoint_cells : 0.0;
  return rep;
}

struct NoiseRow {
  Vec4 p{};
  // Sum over runs of the rounded final pi_Y, in hundredths, per radius.
  std::vector<std::int64_t> payoff_cents_sum;
  std::vector<double> mean_payoff;
  std::vector<int> increment_sign;  // +1, 0, -1 per consecutive radius pair
  int decreasing = 0;
};

struct NoiseReport {
  std::vector<double> radii;
  std::vector<NoiseRow> rows;
  std::int64_t increments = 0, positive = 0, negative = 0, unchanged = 0;
  std::int64_t strategies_with_3plus_decreases = 0;
  std::int64_t strategies_with_1or2_decreases = 0;

  double fraction_positive() const { return increments ? double(positive) / double(increments) : 0.0; }
  double fraction_negative() const { return increments ? double(negative) / double(increments) : 0.0; }
  double fraction_3plus() const { return rows.empty() ? 0.0 : double(strategies_with_3plus_decreases) / double(rows.size()); }
};

inline std::vector<double> default_noise_radii() { return linspace(1e-2, 0.5, 10); }

// LRS from the same initial strategies at each radius. The performance
// measure is the mean of the two-decimal final payoffs, compared exactly.
inline NoiseReport lrs_noise_sweep(const std::vector<Vec4>& p_set, const GameParams& g,
                                   const std::vector<double>& radii, std::int64_t n_q0, std::uint64_t seed,
                                   const CensusOptions& opt = {}) {
  NoiseReport rep;
  rep.radii = radii;
  for (std::size_t pi = 0; pi < p_set.size(); ++pi) {
    NoiseRow row;
    row.p = p_set[pi];
    const std::uint64_t p_seed = stream_seed(seed, pi);
    for (double r : radii) {
      CensusOptions o = opt;
      o.learner = LearnerKind::LRS;
      o.config.lrs_radius = r;
      const auto census = endpoint_distribution(row.p, g, n_q0, p_seed, o);
      std::int64_t sum = 0, ok = 0;
      for (const auto& c : census.clusters) {
        sum += c.y_cents * c.count;
        ok += c.count;
      }
      row.payoff_cents_sum.push_back(sum);
      row.mean_payoff.push_back(ok ? from_cents(sum) / double(ok) : 0.0);
    }
    for (std::size_t k = 1; k < radii.size(); ++k) {
      const auto a = row.payoff_cents_sum[k - 1], b = row.payoff_cents_sum[k];
      const int s = b > a ? 1 : (b < a ? -1 : 0);
      row.increment_sign.push_back(s);
      ++rep.increments;
      if (s > 0) ++rep.positive;
      if (s < 0) {
        ++rep.negative;
        ++row.decreasing;
      }
      if (s == 0) ++rep.unchanged;
    }
    if (row.decreasing >= 3) ++rep.strategies_with_3plus_decreases;
    else if (row.decreasing >= 1) ++rep.strategies_with_1or2_decreases;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

struct TrembleStrategyResult {
  Vec4 p{};
  double global_pi_y = 0;  // best of feasible-region rightmost point and the error-free census
  std::int64_t converged = 0, at_global = 0, max_iterations = 0, stalled = 0;
  std::int64_t baseline_suboptimal = 0;  // error-free runs that miss the optimum
};

struct TrembleGameReport {
  GameParams game;
  std::vector<TrembleStrategyResult> strategies;
  std::int64_t runs = 0, converged = 0, at_global = 0, max_iterations = 0, stalled = 0;
  std::int64_t baseline_suboptimal = 0;

  double fraction_global() const { return converged ? double(at_global) / double(converged) : 0.0; }
};

// PGA with a trembling hand against arcsine-sampled fixed strategies. A run
// counts as globally optimal when the error-free payoff of its final
// intended strategy rounds to the per-strategy optimum.
inline std::vector<TrembleGameReport> trembling_sweep(const std::vector<GameParams>& games, std::int64_t n_p,
                                                      std::int64_t n_q0, double tremble, std::uint64_t seed,
                                                      const CensusOptions& opt = {}) {
  if (!(tremble > 0.0 && tremble < 0.5)) throw ValidationError("tremble rate must lie in (0, 0.5)");
  std::vector<TrembleGameReport> out;
  for (std::size_t gi = 0; gi < games.size(); ++gi) {
    const GameParams& g = games[gi];
    TrembleGameReport rep;
    rep.game = g;
    const std::uint64_t game_seed = stream_seed(seed, gi);
    for (std::int64_t k = 0; k < n_p; ++k) {
      Rng prng = Rng::stream(game_seed, static_cast<std::uint64_t>(k));
      TrembleStrategyResult res;
      res.p = sample_arcsine_vec(prng);
      const std::uint64_t q_seed = stream_seed(game_seed ^ 0x5DEECE66DULL, static_cast<std::uint64_t>(k));

      CensusOptions base = opt;
      base.learner = LearnerKind::PGA;
      base.config.tremble = 0.0;
      const auto baseline = endpoint_distribution(res.p, g, n_q0, q_seed, base);
      const double rightmost = feasible_region(res.p, g).rightmost.pi_y;
      const std::int64_t global_cents =
          std::max(to_cents(rightmost), baseline.clusters.empty() ? INT64_MIN : baseline.clusters.front().y_cents);
      res.global_pi_y = from_cents(global_cents);
      for (const auto& r : baseline.runs)
        if (!r.failed && r.y_cents() != global_cents) ++res.baseline_suboptimal;

      CensusOptions shaky = opt;
      shaky.learner = LearnerKind::PGA;
      shaky.config.tremble = tremble;
      const auto census = endpoint_distribution(res.p, g, n_q0, q_seed, shaky);
      for (const auto& r : census.runs) {
        if (r.failed) continue;
        switch (r.termination) {
          case Termination::Converged: ++res.converged; break;
          case Termination::MaxIterations: ++res.max_iterations; break;
          case Termination::Stalled: ++res.stalled; break;
        }
        if (r.termination == Termination::Converged && r.y_cents() == global_cents) ++res.at_global;
      }
      rep.runs += n_q0;
      rep.converged += res.converged;
      rep.at_global += res.at_global;
      rep.max_iterations += res.max_iterations;
      rep.stalled += res.stalled;
      rep.baseline_suboptimal += res.baseline_suboptimal;
      rep.strategies.push_back(res);
    }
    out.push_back(std::move(rep));
  }
  return out;
}

// First initial strategy (by stream index) whose error-free PGA endpoint
// rounds to `target`.
struct BasinSeed {
  std::int64_t index = -1;
  Vec4 q0{};
};

inline std::optional<BasinSeed> find_initial_in_basin(const Vec4& p, const GameParams& g, const PayoffPair& target,
                                                      std::uint64_t seed, std::int64_t max_tries,
                                                      const LearnerConfig& cfg = {}) {
  const Landscape land(p, g);
  CensusOptions opt;
  opt.config = cfg;
  opt.config.record_every = 0;
  opt.config.tremble = 0.0;
  for (std::int64_t i = 0; i < max_tries; ++i) {
    const RunRecord r = single_run(land, nullptr, seed, i, opt);
    if (!r.failed && r.y_cents() == to_cents(target.pi_y) && r.x_cents() == to_cents(target.pi_x))
      return BasinSeed{i, r.q0};
  }
  return std::nullopt;
}

inline Vec4 initial_strategy(std::uint64_t seed, std::int64_t index) {
  Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(index));
  return sample_arcsine_vec(rng);
}

// Number of recorded iterations whose payoff pair lies within `radius` of
// `target` in both coordinates.
inline std::int64_t dwell_iterations(const Trajectory& tr, const PayoffPair& target, double radius) {
  std::int64_t n = 0;
  for (const auto& r : tr.records)
    if (std::abs(r.pi_y - target.pi_y) < radius && std::abs(r.pi_x - target.pi_x) < radius) ++n;
  return n;
}

// Rightmost feasible point for each of n arcsine-sampled fixed strategies.
inline std::vector<PayoffPair> rightmost_points(const GameParams& g, std::int64_t n, std::uint64_t seed,
                                                unsigned threads = 1) {
  if (n < 1) throw ValidationError("sample count must be at least 1");
  g.validate();
  std::vector<PayoffPair> out(static_cast<std::size_t>(n));
  parallel_for(out.size(), threads, [&](std::size_t i) {
    out[i] = feasible_region(initial_strategy(seed, static_cast<std::int64_t>(i)), g).rightmost;
  });
  return out;
}

struct HeatmapGrid {
  int bins = 0;
  double lo = 0, hi = 0;             // same range on both axes
  std::vector<std::int64_t> counts;  // counts[row * bins + col], row = pi_X bin, col = pi_Y bin
  std::int64_t total = 0;

  std::int64_t at(int row, int col) const { return counts[static_cast<std::size_t>(row * bins + col)]; }
  std::int64_t nonzero() const {
    return std::count_if(counts.begin(), counts.end(), [](std::int64_t c) { return c > 0; });
  }
};

// Uniform binning of payoff pairs over the game's payoff box.
inline HeatmapGrid heatmap_grid(const std::vector<PayoffPair>& points, const GameParams& g, int bins) {
  if (bins < 2) throw ValidationError("heatmap needs at least 2 bins");
  HeatmapGrid grid;
  grid.bins = bins;
  grid.lo = g.min_payoff();
  grid.hi = g.max_payoff();
  grid.counts.assign(static_cast<std::size_t>(bins) * bins, 0);
  const double width = grid.hi - grid.lo;
  auto bin_of = [&](double v) {
    if (!(width > 0.0)) return 0;
    const int b = static_cast<int>(std::floor((v - grid.lo) / width * bins));
    return std::clamp(b, 0, bins - 1);
  };
  for (const auto& pt : points) {
    ++grid.counts[static_cast<std::size_t>(bin_of(pt.pi_x) * bins + bin_of(pt.pi_y))];
    ++grid.total;
  }
  return grid;
}

inline HeatmapGrid heatmap_grid(const EndpointCensus& census, const GameParams& g, int bins) {
  std::vector<PayoffPair> pts;
  for (const auto& r : census.runs)
    if (!r.failed) pts.push_back(r.payoff);
  return heatmap_grid(pts, g, bins);
}

}  // namespace payofflab
