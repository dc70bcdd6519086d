#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "levypass/model.hpp"

namespace levypass {

double ecdf_value(std::span<const double> sorted_samples, double x);

// Exact sup distance between the empirical CDF and a continuous target.
double ks_distance(std::vector<double> samples,
                   const std::function<double(double)>& cdf);

// L1 distance between the empirical and target CDFs, integrated segmentwise
// between order statistics; tail beyond the largest sample integrated to
// `upper`.
double wasserstein1(std::vector<double> samples,
                    const std::function<double(double)>& cdf, double upper);

struct QuantileRow {
  double p, empirical, target;
};

struct EcdfReport {
  std::size_t n = 0;
  double ks = 0.0;
  double wasserstein = 0.0;
  std::vector<QuantileRow> quantiles;
  std::string law_id;
  double norm_a = 0.0, norm_r = 0.0;
};

EcdfReport make_ecdf_report(std::vector<double> samples,
                            const std::function<double(double)>& cdf,
                            const std::function<double(double)>& quantile,
                            std::string law_id, double norm_a, double norm_r,
                            double w1_upper);

struct LocalBin {
  double z_lo, z_hi, t_lo, t_hi;
  std::uint64_t count = 0;
  double expected = 0.0;  // n * integral of the target over the bin
  double scaled_freq = 0.0;
  double target_density = 0.0;
  double rel_err = 0.0;
  double rel_ci = 0.0;
  bool pass = false;
};

struct LocalCheck {
  std::vector<LocalBin> bins;
  double pass_fraction = 0.0;
  std::size_t n_in_window = 0;
  bool insufficient = false;
};

// Scaled-histogram comparison of (Z/a(u), tau/r(u)) against a joint limit
// density on a rectangular window. Bins with fewer than min_count entries
// are merged along t within their z row.
LocalCheck local_density_check(
    std::span<const std::pair<double, double>> zt,
    const std::function<double(double, double)>& target_density, double z_lo,
    double z_hi, double t_lo, double t_hi, int nz, int nt,
    std::uint64_t min_count = 30);

struct StratumReport {
  double z_lo, z_hi, z_mean;
  std::size_t n = 0;
  double ks_vs_limit = 0.0;
  double critical = 0.0;
  bool pass = false;
};

struct ConditionalOvershootReport {
  std::vector<StratumReport> strata;
  // Case (ii) only: largest two-sample distance between strata, against the
  // Bonferroni-corrected critical value.
  double max_pairwise_ks = 0.0;
  double pairwise_critical = 0.0;
  bool pairwise_pass = true;
  bool pass = false;
};

ConditionalOvershootReport conditional_overshoot_check(
    std::span<const std::pair<double, double>> zo, TailCase c, double beta,
    int n_strata, double alpha = 0.05);

struct LevelRow {
  double u = 0.0;
  std::size_t n = 0;
  double ks_overshoot = 0.0, ks_undershoot = 0.0, ks_passage = 0.0;
};

struct ConvergenceReport {
  std::vector<LevelRow> rows;
  bool trend_ok = false;   // distances at the largest level below the smallest
  bool single_level = false;
};

ConvergenceReport convergence_trend(std::span<const LevelRow> rows);

// Kolmogorov asymptotic critical value for the two-sided one-sample test.
double ks_critical(double alpha, double n);
// Two-sample version.
double ks_critical_two_sample(double alpha, double n1, double n2);

// Theoretical targets for one model, in normalised coordinates
// (O/a(u), Z/a(u), tau/r(u)).
struct LevelTargets {
  std::function<double(double)> overshoot_cdf;
  std::function<double(double)> undershoot_cdf;
  std::function<double(double)> passage_cdf;
  std::function<double(double, double)> local_joint_density;  // (z, t)
  std::string overshoot_id, undershoot_id, passage_id;
  bool has_local = false;
};

LevelTargets make_level_targets(const ModelSpec& model);

}  // namespace levypass
