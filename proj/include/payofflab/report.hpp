#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "payofflab/errors.hpp"
#include "payofflab/experiments.hpp"
#include "payofflab/learn.hpp"
#include "payofflab/region.hpp"

namespace payofflab::report {

using nlohmann::json;

// Round-trip exact decimal form of a double.
inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_cents(std::int64_t cents) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", from_cents(cents));
  return buf;
}

inline std::string fmt2(double v) { return fmt_cents(to_cents(v)); }

inline json vec_json(const Vec4& v) { return json::array({v[0], v[1], v[2], v[3]}); }

inline json payoff_json(const PayoffPair& p) {
  return {{"pi_y", p.pi_y}, {"pi_x", p.pi_x}, {"pi_y_2dp", fmt2(p.pi_y)}, {"pi_x_2dp", fmt2(p.pi_x)}};
}

inline json game_json(const GameParams& g) { return {{"R", g.R}, {"S", g.S}, {"T", g.T}, {"P", g.P}}; }

inline json learner_json(const LearnerConfig& c) {
  return {{"learning_rate", c.learning_rate},   {"payoff_tolerance", c.payoff_tolerance},
          {"max_iterations", c.max_iterations}, {"tremble", c.tremble},
          {"lrs_radius", c.lrs_radius},         {"lrs_patience", c.lrs_patience},
          {"lrs_discount", c.lrs_discount},     {"lrs_boundary", std::string(to_string(c.lrs_boundary))},
          {"record_every", c.record_every},     {"stall_window", c.stall_window}};
}

inline void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& runs) {
  os << "run_id,q0_cc,q0_cd,q0_dc,q0_dd,qf_cc,qf_cd,qf_dc,qf_dd,pi_y,pi_x,pi_y_2dp,pi_x_2dp,n_steps,termination,"
        "endpoint_form\n";
  for (const auto& r : runs) {
    os << r.run_id;
    for (double v : r.q0) os << ',' << fmt17(v);
    if (r.failed) {
      os << ",,,,,,,,," << r.steps << ",failed,\n";
      continue;
    }
    for (double v : r.qf) os << ',' << fmt17(v);
    os << ',' << fmt17(r.payoff.pi_y) << ',' << fmt17(r.payoff.pi_x) << ',' << fmt_cents(r.y_cents()) << ','
       << fmt_cents(r.x_cents()) << ',' << r.steps << ',' << to_string(r.termination) << ','
       << to_string(r.form.classification) << '\n';
  }
}

inline void write_clusters_csv(std::ostream& os, const std::vector<EndpointCluster>& clusters) {
  os << "pi_y_2dp,pi_x_2dp,count,frequency\n";
  for (const auto& c : clusters)
    os << fmt_cents(c.y_cents) << ',' << fmt_cents(c.x_cents) << ',' << c.count << ',' << fmt17(c.frequency) << '\n';
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "iter,q_cc,q_cd,q_dc,q_dd,pi_y,pi_x,grad_norm\n";
  for (const auto& r : tr.records) {
    os << r.iteration;
    for (double v : r.q) os << ',' << fmt17(v);
    os << ',' << fmt17(r.pi_y) << ',' << fmt17(r.pi_x) << ',' << fmt17(r.grad_norm) << '\n';
  }
}

inline void write_candidates_csv(std::ostream& os, const FeasibleRegion& region) {
  os << "q_cc,q_cd,q_dc,q_dd,closed_class,pi_y,pi_x\n";
  for (const auto& c : region.candidates) {
    for (double v : c.q) os << fmt17(v) << ',';
    os << static_cast<int>(c.closed_class) << ',' << fmt17(c.payoff.pi_y) << ',' << fmt17(c.payoff.pi_x) << '\n';
  }
}

inline json cluster_json(const EndpointCluster& c) {
  json reps = json::array();
  for (const auto& q : c.representatives) reps.push_back(vec_json(q));
  json forms = json::object();
  for (int k = 0; k < 5; ++k)
    if (c.form_histogram[k] > 0) forms[std::string(to_string(static_cast<EndpointClass>(k)))] = c.form_histogram[k];
  return {{"pi_y_2dp", fmt_cents(c.y_cents)},
          {"pi_x_2dp", fmt_cents(c.x_cents)},
          {"count", c.count},
          {"frequency", c.frequency},
          {"representatives", reps},
          {"endpoint_forms", forms}};
}

inline json clusters_json(const std::vector<EndpointCluster>& clusters) {
  json out = json::array();
  for (const auto& c : clusters) out.push_back(cluster_json(c));
  return out;
}

inline json runs_json(const std::vector<RunRecord>& runs) {
  json out = json::array();
  for (const auto& r : runs) {
    json j = {{"run_id", r.run_id}, {"q0", vec_json(r.q0)}, {"n_steps", r.steps}};
    if (r.failed) {
      j["termination"] = "failed";
      j["error"] = r.error;
    } else {
      j["qf"] = vec_json(r.qf);
      j["payoff"] = payoff_json(r.payoff);
      j["termination"] = std::string(to_string(r.termination));
      j["endpoint_form"] = std::string(to_string(r.form.classification));
    }
    out.push_back(std::move(j));
  }
  return out;
}

inline json census_json(const EndpointCensus& census) {
  return {{"clusters", clusters_json(census.clusters)}, {"failures", census.failures}, {"runs", runs_json(census.runs)}};
}

inline json trajectory_summary_json(const Trajectory& tr) {
  return {{"endpoint", vec_json(tr.endpoint)},
          {"endpoint_payoff", payoff_json(tr.endpoint_payoff)},
          {"termination", std::string(to_string(tr.termination))},
          {"steps", tr.steps},
          {"degenerate_steps", tr.degenerate_steps},
          {"endpoint_form", std::string(to_string(classify_endpoint(tr.endpoint).classification))}};
}

inline json region_json(const FeasibleRegion& r, FixedStrategyClass cls) {
  json hull = json::array();
  for (const auto& v : r.hull) hull.push_back(payoff_json(v));
  return {{"hull", hull},
          {"rightmost", payoff_json(r.rightmost)},
          {"classification", std::string(to_string(cls))},
          {"degenerate", r.degenerate},
          {"candidate_count", r.candidates.size()}};
}

inline json sweep_json(const SweepReport& rep) {
  json cells = json::array();
  for (const auto& c : rep.cells) {
    json j = {{"chi", c.chi}, {"phi", c.phi}, {"feasible", c.feasible}};
    if (!c.feasible) {
      j["error"] = c.error;
    } else {
      j["p"] = vec_json(c.p);
      j["cluster_count"] = c.clusters.size();
      j["clusters"] = clusters_json(c.clusters);
      j["suboptimal_frequency"] = c.suboptimal_frequency;
      j["global_optimum"] = payoff_json(c.global_optimum);
    }
    cells.push_back(std::move(j));
  }
  return {{"game", game_json(rep.game)},
          {"cells", cells},
          {"feasible_cells", rep.feasible_cells},
          {"multi_endpoint_cells", rep.multi_endpoint_cells},
          {"mean_suboptimal_frequency", rep.mean_suboptimal_frequency}};
}

inline json noise_json(const NoiseReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"p", vec_json(r.p)},
                    {"mean_pi_y", r.mean_payoff},
                    {"pi_y_cents_sum", r.payoff_cents_sum},
                    {"increment_sign", r.increment_sign},
                    {"decreasing_increments", r.decreasing}});
  return {{"radii", rep.radii},
          {"rows", rows},
          {"increments", rep.increments},
          {"positive", rep.positive},
          {"negative", rep.negative},
          {"unchanged", rep.unchanged},
          {"fraction_positive", rep.fraction_positive()},
          {"fraction_negative", rep.fraction_negative()},
          {"strategies_with_1or2_decreases", rep.strategies_with_1or2_decreases},
          {"strategies_with_3plus_decreases", rep.strategies_with_3plus_decreases},
          {"fraction_3plus", rep.fraction_3plus()}};
}

inline json tremble_json(const std::vector<TrembleGameReport>& reps) {
  json out = json::array();
  for (const auto& g : reps) {
    json strategies = json::array();
    for (const auto& s : g.strategies)
      strategies.push_back({{"p", vec_json(s.p)},
                            {"global_pi_y_2dp", fmt2(s.global_pi_y)},
                            {"converged", s.converged},
                            {"at_global", s.at_global},
                            {"max_iterations", s.max_iterations},
                            {"stalled", s.stalled},
                            {"baseline_suboptimal", s.baseline_suboptimal}});
    out.push_back({{"game", game_json(g.game)},
                   {"runs", g.runs},
                   {"converged", g.converged},
                   {"at_global", g.at_global},
                   {"max_iterations", g.max_iterations},
                   {"stalled", g.stalled},
                   {"baseline_suboptimal", g.baseline_suboptimal},
                   {"fraction_global", g.fraction_global()},
                   {"strategies", strategies}});
  }
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

template <class Writer>
std::string to_text(Writer&& w) {
  std::ostringstream os;
  w(os);
  return os.str();
}

}  // namespace payofflab::report
