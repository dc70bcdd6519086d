#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "levypass/ladder.hpp"
#include "levypass/model.hpp"
#include "levypass/simulate.hpp"

namespace levypass {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VerifySettings {
  double window_z_lo = 0.1, window_z_hi = 3.0;
  double window_t_lo = 0.1, window_t_hi = 3.0;
  int bins_z = 10, bins_t = 10;
  double ks_overshoot_tol = 0.05;
  double ks_undershoot_tol = 0.06;
  double ks_passage_tol = 0.06;
  double local_pass_fraction = 0.9;
  int strata = 5;
};

struct LadderSettings {
  double p_pos = 0.3;
  JumpFamily positive{};
  JumpFamily negative{};
  std::uint64_t n_paths = 100000;
  std::uint64_t horizon = 100000;
  double stop_depth = 1000.0;
  GridSpec grid{0.05, 40.0, 96};
  std::vector<double> check_u{1, 2, 3, 4, 5};

  WalkSpec walk() const { return WalkSpec(p_pos, positive, negative); }
};

struct ExperimentConfig {
  std::string run_id = "run";
  std::uint64_t seed = 1;
  int workers = 4;
  std::string out_dir = "out";
  std::optional<ModelSpec> model;
  std::vector<double> levels;
  std::size_t samples_per_level = 10000;
  SimBudget budget{};
  std::uint64_t attempt_ceiling = 100000000ULL;
  std::vector<double> snapshot_fractions{0.25, 0.5, 0.75};
  VerifySettings verify{};
  std::optional<LadderSettings> ladder;
};

// Parses the experiment file: JSON with // and /* */ comments allowed.
// Unknown keys are rejected.
ExperimentConfig parse_config(const std::string& text);
std::string serialize_config(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

// CSV round-trip for sample files.
ConditionalSamples samples_from_csv(const std::string& text,
                                    std::vector<double>* fractions);

}  // namespace levypass
