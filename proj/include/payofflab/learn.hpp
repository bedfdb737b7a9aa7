#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "payofflab/errors.hpp"
#include "payofflab/game.hpp"
#include "payofflab/payoff.hpp"
#include "payofflab/rng.hpp"

namespace payofflab {

// Smallest payoff gain LRS can detect.
inline constexpr double kLrsAcceptThreshold = 1e-15;

// How an LRS proposal coordinate that would leave [0, 1] is handled.
// Clamp samples the full interval and clamps, so bounds are hit exactly with
// positive probability; Truncate samples uniformly from the interval already
// intersected with [0, 1].
enum class LrsBoundary { Clamp, Truncate };

inline std::string_view to_string(LrsBoundary b) { return b == LrsBoundary::Clamp ? "clamp" : "truncate"; }

struct LearnerConfig {
  double learning_rate = 1e-2;
  double payoff_tolerance = 1e-15;
  std::int64_t max_iterations = 2'000'000;
  double tremble = 0.0;
  double lrs_radius = 0.1;
  std::int64_t lrs_patience = 10'000;
  double lrs_discount = 0.9999;
  LrsBoundary lrs_boundary = LrsBoundary::Clamp;
  // Keep every k-th trajectory record (plus the last); 0 keeps none.
  int record_every = 1;
  // Consecutive steps with |delta pi| < 10 * payoff_tolerance that count as
  // a stall.
  int stall_window = 10;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
    if (!(payoff_tolerance > 0.0)) throw ValidationError("payoff tolerance must be positive");
    if (max_iterations < 1) throw ValidationError("max_iterations must be at least 1");
    if (!(tremble >= 0.0 && tremble < 0.5)) throw ValidationError("tremble rate must lie in [0, 0.5)");
    if (!(lrs_radius > 0.0)) throw ValidationError("LRS radius must be positive");
    if (lrs_patience < 1) throw ValidationError("LRS patience must be at least 1");
    if (!(lrs_discount > 0.0 && lrs_discount < 1.0)) throw ValidationError("LRS discount must lie in (0, 1)");
    if (record_every < 0) throw ValidationError("record_every must be non-negative");
  }
};

enum class Termination { Converged, MaxIterations, Stalled };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::Stalled: return "stalled";
  }
  return "?";
}

struct TrajectoryRecord {
  std::int64_t iteration = 0;
  Vec4 q{};
  double pi_y = 0, pi_x = 0;
  double grad_norm = 0;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  Vec4 endpoint{};
  // Payoff of the objective at the endpoint (effective strategy for PGA
  // with trembling, discounted payoff for LRS).
  PayoffPair endpoint_payoff;
  Termination termination = Termination::MaxIterations;
  std::int64_t steps = 0;
  std::int64_t degenerate_steps = 0;
};

enum class EndpointClass { TopFace, BottomFace, FullyDeterministic, OtherBoundary, Interior };

inline std::string_view to_string(EndpointClass c) {
  switch (c) {
    case EndpointClass::TopFace: return "top_face";
    case EndpointClass::BottomFace: return "bottom_face";
    case EndpointClass::FullyDeterministic: return "fully_deterministic";
    case EndpointClass::OtherBoundary: return "other_boundary";
    case EndpointClass::Interior: return "interior";
  }
  return "?";
}

struct EndpointForm {
  EndpointClass classification = EndpointClass::Interior;
  std::uint8_t deterministic_mask = 0;  // bit i set when component i is 0 or 1
};

inline Vec4 project_to_hypercube(const Vec4& x) {
  Vec4 out;
  for (int i = 0; i < 4; ++i) out[i] = std::clamp(x[i], 0.0, 1.0);
  return out;
}

// Strategy actually played by a trembling hand with error rate eps.
inline Vec4 effective_strategy(const Vec4& q, double eps) {
  if (eps == 0.0) return q;
  Vec4 out;
  for (int i = 0; i < 4; ++i) out[i] = (1.0 - eps) * q[i] + eps * (1.0 - q[i]);
  return out;
}

inline MemoryOneStrategy effective_strategy(const MemoryOneStrategy& q, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw ValidationError("error rate must lie in [0, 1)");
  return MemoryOneStrategy::unchecked(effective_strategy(q.probs(), eps), q.p0());
}

inline EndpointForm classify_endpoint(const Vec4& q, double tol = 1e-9) {
  auto is0 = [&](double v) { return v <= tol; };
  auto is1 = [&](double v) { return v >= 1.0 - tol; };
  EndpointForm form;
  for (int i = 0; i < 4; ++i)
    if (is0(q[i]) || is1(q[i])) form.deterministic_mask |= static_cast<std::uint8_t>(1u << i);
  if (form.deterministic_mask == 0xF) {
    form.classification = EndpointClass::FullyDeterministic;
  } else if (is1(q[0]) && is1(q[1])) {
    form.classification = EndpointClass::TopFace;
  } else if (is0(q[2]) && is0(q[3])) {
    form.classification = EndpointClass::BottomFace;
  } else if (form.deterministic_mask != 0) {
    form.classification = EndpointClass::OtherBoundary;
  } else {
    form.classification = EndpointClass::Interior;
  }
  return form;
}

namespace detail {

inline double max_abs(const Vec4& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

class Recorder {
public:
  Recorder(Trajectory& tr, int every) : tr_(tr), every_(every) {}

  void offer(std::int64_t it, const Vec4& q, const PayoffPair& pay, double gnorm) {
    last_ = {it, q, pay.pi_y, pay.pi_x, gnorm};
    if (every_ > 0 && it % every_ == 0) tr_.records.push_back(last_);
  }

  void finish() {
    if (every_ > 0 && (tr_.records.empty() || tr_.records.back().iteration != last_.iteration))
      tr_.records.push_back(last_);
  }

private:
  Trajectory& tr_;
  int every_;
  TrajectoryRecord last_;
};

}  // namespace detail

// Projected gradient ascent of pi_Y over Y's intended strategy. With a
// trembling hand the payoff is that of the effective strategy and the
// gradient picks up the chain-rule factor (1 - 2 eps).
inline Trajectory pga_run(const Landscape& land, const Vec4& q0, const LearnerConfig& cfg) {
  cfg.validate();
  const double eps = cfg.tremble;
  const double chain = 1.0 - 2.0 * eps;
  Trajectory tr;
  detail::Recorder rec(tr, cfg.record_every);

  Vec4 q = project_to_hypercube(q0);
  LandscapePoint pt = land.evaluate(effective_strategy(q, eps));
  if (pt.degenerate) ++tr.degenerate_steps;
  rec.offer(0, q, pt.payoff, chain * detail::max_abs(pt.grad_y));
  int quiet = 0;
  std::int64_t it = 0;
  tr.termination = Termination::MaxIterations;
  while (it < cfg.max_iterations) {
    ++it;
    Vec4 next;
    for (int i = 0; i < 4; ++i) next[i] = q[i] + cfg.learning_rate * chain * pt.grad_y[i];
    next = project_to_hypercube(next);
    const LandscapePoint np = land.evaluate(effective_strategy(next, eps));
    if (np.degenerate) ++tr.degenerate_steps;
    const double delta = np.payoff.pi_y - pt.payoff.pi_y;
    q = next;
    pt = np;
    rec.offer(it, q, pt.payoff, chain * detail::max_abs(pt.grad_y));
    if (std::abs(delta) < cfg.payoff_tolerance) {
      tr.termination = Termination::Converged;
      break;
    }
    quiet = std::abs(delta) < 10.0 * cfg.payoff_tolerance ? quiet + 1 : 0;
    if (quiet >= cfg.stall_window) {
      tr.termination = Termination::Stalled;
      break;
    }
  }
  rec.finish();
  tr.steps = it;
  tr.endpoint = q;
  tr.endpoint_payoff = pt.payoff;
  return tr;
}

inline Trajectory pga_run(const MemoryOneStrategy& p, const MemoryOneStrategy& q0, const GameParams& g,
                          const LearnerConfig& cfg) {
  return pga_run(Landscape(p.probs(), g), q0.probs(), cfg);
}

// Local random search on the discounted payoff: propose a point uniformly in
// the box of half-width lrs_radius (clamped to [0,1]), accept on strict
// improvement, stop after lrs_patience consecutive rejections.
inline Trajectory lrs_run(const DiscountedLandscape& land, const Vec4& q0, const LearnerConfig& cfg, Rng& rng) {
  cfg.validate();
  Trajectory tr;
  detail::Recorder rec(tr, cfg.record_every);
  Vec4 q = project_to_hypercube(q0);
  double value = land.payoff_y(q);
  rec.offer(0, q, land.payoff(q), 0.0);
  std::int64_t rejected = 0;
  std::int64_t it = 0;
  tr.termination = Termination::MaxIterations;
  while (it < cfg.max_iterations) {
    ++it;
    Vec4 cand;
    for (int i = 0; i < 4; ++i)
      cand[i] = cfg.lrs_boundary == LrsBoundary::Clamp
                    ? std::clamp(rng.uniform(q[i] - cfg.lrs_radius, q[i] + cfg.lrs_radius), 0.0, 1.0)
                    : rng.uniform(std::max(0.0, q[i] - cfg.lrs_radius), std::min(1.0, q[i] + cfg.lrs_radius));
    const double v = land.payoff_y(cand);
    if (v - value > kLrsAcceptThreshold) {
      q = cand;
      value = v;
      rejected = 0;
      rec.offer(it, q, land.payoff(q), 0.0);
    } else if (++rejected >= cfg.lrs_patience) {
      tr.termination = Termination::Stalled;
      break;
    }
  }
  rec.finish();
  tr.steps = it;
  tr.endpoint = q;
  tr.endpoint_payoff = land.payoff(q);
  return tr;
}

inline Trajectory lrs_run(const MemoryOneStrategy& p, const MemoryOneStrategy& q0, const GameParams& g,
                          const LearnerConfig& cfg, Rng& rng) {
  return lrs_run(DiscountedLandscape(p.probs(), g, cfg.lrs_discount), q0.probs(), cfg, rng);
}

}  // namespace payofflab
