#pragma once

#include <stdexcept>
#include <vector>

namespace levypass {

struct SeriesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BridgeQuery {
  double t = 1.0;                // horizon
  double z = 1.0;                // endpoint
  std::vector<double> times;     // 0 < s_1 < ... < s_k < 1
  std::vector<double> values;    // 0 < y_1 < ... < y_k < z
};

// Density h_t of the increasing stable process with Laplace exponent
// lambda^gamma_bar, 0 < gamma_bar < 1. Evaluation switches between the
// alternating power series in x^-gamma_bar (large x) and a saddle-point
// form with first correction (small x); the switch point is calibrated at
// construction by sweeping for the best mutual agreement.
class StableDensity {
 public:
  explicit StableDensity(double gamma_bar);

  double gamma_bar() const { return gb_; }
  double gamma() const { return 1.0 - gb_; }

  double density1(double x) const;             // h_1
  double density(double t, double z) const;    // h_t, zero for z <= 0
  double occupation_integral(double z) const;  // int_0^inf h_t(z) dt
  // int_x^inf h_1, by termwise integration of the series; x must lie in the
  // series region.
  double tail_integral1(double x) const;

  // Evaluation branches, exposed for cross-checking.
  double series_density1(double x) const;
  double saddle_density1(double x) const;

  double switch_point() const { return x0_; }
  double switch_agreement() const { return x0_agreement_; }

 private:
  double series_density1_impl(double x, double* cancellation) const;

  double gb_;
  double inv_gb_;
  std::vector<long double> coeff_;  // signed series coefficients
  double saddle_a_, saddle_b_, saddle_pow_, saddle_expo_, saddle_c1_;
  double x0_ = 0.0;
  double x0_agreement_ = 0.0;
};

// Joint density of a stable bridge observed at interior times, Markov
// product of increment densities normalised by the endpoint density.
double bridge_fdd(const StableDensity& law, const BridgeQuery& q);

// Draws D(d1) given D(d1 + d2) = total, by numerical inversion of the
// conditional distribution function at the uniform variate `p`.
double bridge_increment_quantile(const StableDensity& law, double d1,
                                 double d2, double total, double p);

}  // namespace levypass
