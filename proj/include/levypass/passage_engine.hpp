#pragma once

#include <cmath>
#include <vector>

#include "levypass/simulate.hpp"

namespace levypass {

struct PathEvent {
  double t;
  double pos_before;  // position reached just before the jump applies
  double pos_after;
};

struct NullRecorder {
  void event(double, double, double) {}
};

struct VectorRecorder {
  std::vector<PathEvent> events;
  void event(double t, double before, double after) {
    events.push_back({t, before, after});
  }
};

// Jump-to-jump passage kernel. Between positive jumps the path only moves
// down, so the running maximum is attained at jump epochs and the passage
// test needs only the post-jump positions. Stream must provide uniform(),
// exponential(rate) and normal().
template <NegKind K, typename Stream, typename Rec>
PassageOutcome run_passage_path(const ModelSpec& m, double u, Stream& rng,
                                const SimBudget& budget,
                                const LevelScales& sc, Rec& rec) {
  const double lambda_pos = m.lambda_pos;
  const double drift = m.negative.drift_rate;
  const double neg_rate = m.negative.rate;
  const double total_rate =
      K == NegKind::CompoundPoisson ? lambda_pos + neg_rate : lambda_pos;
  const double pos_mark = lambda_pos / total_rate;
  const double gb = m.negative.gamma_bar;
  const double inv_gb = 1.0 / gb;
  const double kappa = m.negative.stable_scale;

  const double stop_time = budget.t_cap * sc.r;
  const double stop_depth = -budget.depth_cap * sc.a;

  double t = 0.0, pos = 0.0, infimum = 0.0;
  std::uint64_t events = 0;

  while (true) {
    const double gap = rng.exponential(total_rate);
    t += gap;
    bool positive_event = true;
    if constexpr (K == NegKind::Drift) {
      pos -= drift * gap;
    } else if constexpr (K == NegKind::StableSubordinator) {
      pos -= std::pow(kappa * gap, inv_gb) * sample_stable_unit(rng, gb);
    } else {
      positive_event = rng.uniform() < pos_mark;
    }
    if (pos < infimum) infimum = pos;
    ++events;

    if (positive_event) {
      const double before = pos;
      pos += m.positive.sample(rng);
      rec.event(t, before, pos);
      if (pos > u) {
        PassageOutcome out;
        out.passed = true;
        out.sample.level = u;
        out.sample.passage_time = t;
        out.sample.undershoot = -before;
        out.sample.overshoot = pos - u;
        return out;
      }
    } else {
      const double before = pos;
      pos -= m.negative.step.sample(rng);
      rec.event(t, before, pos);
    }

    if ((t > stop_time && pos < stop_depth) || events >= budget.max_events) {
      PassageOutcome out;
      out.passed = false;
      out.diagnostics = {t, infimum, events, events >= budget.max_events};
      return out;
    }
  }
}

template <typename Stream, typename Rec>
PassageOutcome run_passage_path(const ModelSpec& m, double u, Stream& rng,
                                const SimBudget& budget,
                                const LevelScales& sc, Rec& rec) {
  switch (m.negative.kind) {
    case NegKind::Drift:
      return run_passage_path<NegKind::Drift>(m, u, rng, budget, sc, rec);
    case NegKind::CompoundPoisson:
      return run_passage_path<NegKind::CompoundPoisson>(m, u, rng, budget, sc,
                                                        rec);
    case NegKind::StableSubordinator:
      return run_passage_path<NegKind::StableSubordinator>(m, u, rng, budget,
                                                           sc, rec);
  }
  throw std::logic_error("run_passage_path: unhandled negative kind");
}

}  // namespace levypass
