#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "levypass/model.hpp"

namespace levypass {

// Driftless two-sided random walk S_1 = +J_pos w.p. p_pos, -J_neg otherwise,
// run through a unit-rate Poisson clock. Mean must be negative (possibly
// -inf); p_pos = 0 is allowed as a degenerate testing limit.
struct WalkSpec {
  double p_pos = 0.3;
  JumpFamily pos{};
  JumpFamily neg{};

  WalkSpec(double p, JumpFamily positive, JumpFamily negative);

  double mean() const;                    // may be -inf
  double pos_tail(double x) const;        // P(S_1 > x), x > 0
  double neg_tail(double x) const;        // P(S_1 < -x), x > 0
  double neg_integral_1_to(double x) const;

  template <typename Rng>
  double step(Rng& rng) const {
    if (p_pos > 0.0 && rng.uniform() < p_pos) return pos.sample(rng);
    return -neg.sample(rng);
  }
};

struct GridSpec {
  double lo = 0.1;
  double hi = 20.0;
  int cells = 64;
  std::vector<double> edges() const;  // geometric, cells+1 entries
};

struct LadderEstimate {
  double p_hat = 0.0;   // P(some strict ascending ladder epoch)
  double q_hat = 0.0;   // killing rate of the unit-rate embedding, 1 - p_hat
  double q_se = 0.0;
  bool no_ascent = false;

  std::vector<double> grid_edges;
  std::vector<double> pi_h_tail, pi_h_tail_se;  // P(Z_1 > x, Z_1 finite)
  std::vector<double> g_star, g_star_se;        // E #{n>=0 : Z*_n <= x}
  std::vector<double> a_hstar, a_hstar_se;      // E[zeta* ^ x]

  double mean_weak_ladder = 0.0, mean_weak_ladder_se = 0.0;  // E H_1*
  double p_h1_finite = 0.0, p_h1_finite_se = 0.0;  // Poisson-thinned survival

  std::uint64_t n_paths = 0;
  std::uint64_t horizon = 0;
  double late_max_fraction = 0.0;  // last strict max in final 10% of horizon

  std::vector<double> first_ascent;   // finite strict first ladder heights
  std::vector<double> first_descent;  // first weak descending heights

  // Streaming renewal sums E[sum_n pos_tail(Z*_n + u)] at the check levels.
  std::vector<double> check_u;
  std::vector<double> renewal_tail_sum, renewal_tail_sum_se;
};

// Monte Carlo ladder estimation. Paths stop early once the running minimum
// falls below -stop_depth; with heavy tails the residual recovery
// probability is polynomially small and is reflected in late_max_fraction.
LadderEstimate estimate_ladder(const WalkSpec& walk, std::uint64_t n_paths,
                               std::uint64_t horizon, const GridSpec& grid,
                               std::uint64_t seed, int workers,
                               std::span<const double> check_u,
                               double stop_depth);

struct IdentityRow {
  double u = 0.0;
  double lhs = 0.0, lhs_se = 0.0;
  double rhs = 0.0, rhs_se = 0.0;
  double ratio = 0.0;
  double rel_gap = 0.0;      // |lhs - rhs| / lhs
  double combined_rel_ci = 0.0;
  double z_score = 0.0;      // (rhs - lhs) / combined se
  bool pass = false;         // per-row 95% interval
};

// Familywise 95% verdict across a table of identity rows (Bonferroni).
bool identity_table_pass(std::span<const IdentityRow> rows, double alpha = 0.05);

// Friendly-equation checks. Two independently seeded estimates keep the two
// sides of each identity uncorrelated.
std::vector<IdentityRow> check_vigon_inverse(const LadderEstimate& lhs_est,
                                             const LadderEstimate& rhs_est,
                                             const WalkSpec& walk);
std::vector<IdentityRow> check_vigon_direct_pos(const LadderEstimate& asc_est,
                                                const LadderEstimate& desc_est,
                                                const WalkSpec& walk,
                                                std::span<const double> us);
std::vector<IdentityRow> check_vigon_direct_neg(const LadderEstimate& asc_est,
                                                const LadderEstimate& desc_est,
                                                const WalkSpec& walk,
                                                std::span<const double> us);

struct RatioRow {
  double x = 0.0;
  double numerator = 0.0;  // A*_X(x), exact
  double denominator = 0.0, denominator_se = 0.0;
  double ratio = 0.0;
  bool indeterminate = false;
};

std::vector<RatioRow> check_truncated_mean_ratio(const LadderEstimate& est,
                                                 const WalkSpec& walk,
                                                 std::span<const double> xs);

struct KilledOvershootResult {
  std::vector<double> overshoots;  // conditional on passage before killing
  std::uint64_t attempts = 0;
  std::uint64_t killed = 0;
  double a_u = 0.0;  // norming for the jump family at this level
};

// Compound-Poisson subordinator with exponential killing: overshoot of the
// level conditional on passage happening before the kill. The kill acts as
// an independent geometric thinning of the jump chain.
KilledOvershootResult overshoot_killed_subordinator(const JumpFamily& family,
                                                    double rate, double kill_q,
                                                    double u, std::size_t n,
                                                    std::uint64_t seed,
                                                    int workers);

}  // namespace levypass
