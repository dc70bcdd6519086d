#pragma once

#include <functional>
#include <span>
#include <vector>

#include "levypass/model.hpp"
#include "levypass/stable_law.hpp"

namespace levypass::laws {

// Conditional overshoot limit for a defective subordinator whose jump tail
// is regularly varying (alpha = beta + gamma - 1) or rapidly varying.
double overshoot_density(TailCase c, double alpha, double x);
double overshoot_cdf(TailCase c, double alpha, double x);

// Scaled passage-time density in the gamma = 0 regime.
double passage_local_density(TailCase c, double beta, double t);
double passage_local_cdf(TailCase c, double beta, double t);

// Joint limit of (undershoot, overshoot)/a(u) in the gamma = 0 regime.
double joint_vu_density(TailCase c, double beta, double z, double x);

// Undershoot factor f(z); a density kernel, normalised only against the
// occupation weight z^-gamma / Gamma(1-gamma).
double undershoot_factor(TailCase c, double beta, double gamma, double z);

// Joint limit density of (V, U, W) in the gamma in (0,1) regime.
double joint_vuw_density(TailCase c, double beta, const StableDensity& law,
                         double z, double x, double t);

// (V, U) marginal in the gamma in (0,1) regime.
double marginal_vu_density(TailCase c, double beta, double gamma, double z,
                           double x);

// V marginal alone: f(z) z^-gamma / Gamma(1-gamma).
double marginal_v_density(TailCase c, double beta, double gamma, double z);

// W marginal, a mixture over h_1 evaluated by quadrature.
double marginal_w_density(TailCase c, double beta, const StableDensity& law,
                          double t);

// Path finite-dimensional density: product of stable increments times f at
// the terminal coordinate. times are the interior fractions s_1<...<s_{k-1};
// the last z corresponds to s_k = 1.
double fdd_theta(TailCase c, double beta, const StableDensity& law,
                 std::span<const double> z, std::span<const double> times,
                 double t);

struct Constants {
  double k_gamma;        // 1 / (Gamma(1+g) Gamma(2-g))
  double c_gamma_beta;   // limit constant of the tail comparison
};

Constants constants(double gamma, double beta, TailCase c);

// Tail-comparison constant including the ladder drift/mean correction; pass
// EH1* = +inf for the infinite-mean case.
double c_ledger(double gamma, double beta, TailCase c, double eh1_star,
                double d_hstar);

// Numeric CDF helpers used by the verification targets. Tabulated on a
// fixed grid with monotone interpolation; accurate to ~1e-8.
class TabulatedCdf {
 public:
  TabulatedCdf(std::function<double(double)> density, double upper,
               int cells = 400);
  double operator()(double x) const;

 private:
  std::vector<double> x_, F_;
};

std::function<double(double)> marginal_v_cdf(TailCase c, double beta,
                                             double gamma);
std::function<double(double)> marginal_w_cdf(TailCase c, double beta,
                                             const StableDensity& law);

}  // namespace levypass::laws
