#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levypass/model.hpp"
#include "levypass/norming.hpp"
#include "levypass/rng.hpp"
#include "levypass/stable_law.hpp"

namespace levypass {

struct SimBudget {
  double t_cap = 50.0;      // give up after t_cap * r(u) ...
  double depth_cap = 50.0;  // ... and once below -depth_cap * a(u)
  std::uint64_t max_events = 2'000'000'000ULL;
};

struct LevelScales {
  double a = 0.0;  // a(u)
  double r = 0.0;  // r(u)
};

struct Snapshot {
  double fraction;       // s in (0, 1]
  double dual_position;  // X*(s * tau)
};

struct FirstPassageSample {
  std::uint64_t replicate = 0;
  double level = 0.0;
  double passage_time = 0.0;
  double undershoot = 0.0;  // Z = -X(tau-)
  double overshoot = 0.0;   // O = X(tau) - u, strictly positive
  std::vector<Snapshot> snapshots;
};

struct NoPassageInfo {
  double elapsed = 0.0;
  double infimum = 0.0;
  std::uint64_t events = 0;
  bool event_cap_hit = false;
};

struct PassageOutcome {
  bool passed = false;
  FirstPassageSample sample;
  NoPassageInfo diagnostics;
};

// One exact conditional run. Passage can only happen at a positive jump
// epoch, so the path is advanced jump to jump; the downward component over
// each gap is applied in closed form (drift), as marked events (negative
// compound Poisson) or as one exact stable increment.
PassageOutcome simulate_first_passage(const ModelSpec& model, double u,
                                      RngStream& rng, const SimBudget& budget,
                                      const LevelScales& scales);

struct ConditionalSamples {
  std::vector<FirstPassageSample> samples;  // sorted by replicate
  std::uint64_t attempts = 0;               // replicates consumed
  double p_hat = 0.0;
  double p_se = 0.0;
  bool shortfall = false;
  std::uint64_t ceiling = 0;
};

// Exactly n passage records by rejection over independent replicates.
// Deterministic in (seed, n, budget, fractions) regardless of worker count;
// replicate k always consumes stream (seed, k).
ConditionalSamples sample_conditional(const ModelSpec& model, double u,
                                      std::size_t n, std::uint64_t seed,
                                      int workers, const SimBudget& budget,
                                      std::span<const double> fractions,
                                      std::uint64_t attempt_ceiling);

// Shared-randomness reference: same replicate stream, path evaluated on a
// dense grid (refined at jump epochs). Returns the passage indicator.
bool grid_oracle_passage(const ModelSpec& model, double u, std::uint64_t seed,
                         std::uint64_t replicate, double horizon, double dt);

std::string samples_to_csv(const ConditionalSamples& s,
                           std::span<const double> fractions);

}  // namespace levypass
