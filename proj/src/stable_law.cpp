#include "levypass/stable_law.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "levypass/quadrature.hpp"

namespace levypass {

namespace {
constexpr int kTermCap = 400;
}

StableDensity::StableDensity(double gamma_bar) : gb_(gamma_bar) {
  if (!(gb_ > 0.0 && gb_ < 1.0))
    throw std::invalid_argument("StableDensity: index must lie in (0,1)");
  inv_gb_ = 1.0 / gb_;

  coeff_.resize(kTermCap + 1, 0.0L);
  for (int k = 1; k <= kTermCap; ++k) {
    // (-1)^{k+1} Gamma(k gb + 1) sin(k pi gb) / (k! pi)
    const long double mag =
        std::exp(static_cast<long double>(std::lgamma(k * gb_ + 1.0) -
                                          std::lgamma(k + 1.0)));
    const long double s = std::sin(static_cast<long double>(k) *
                                   std::numbers::pi_v<long double> * gb_);
    const long double sign = (k % 2 == 1) ? 1.0L : -1.0L;
    coeff_[k] = sign * mag * s / std::numbers::pi_v<long double>;
  }

  const double a = gb_;
  saddle_expo_ = a / (1.0 - a);                        // exponent scale
  saddle_b_ = (1.0 - a) * std::pow(a, saddle_expo_);   // decay constant
  saddle_pow_ = -(2.0 - a) / (2.0 * (1.0 - a));        // power prefactor
  saddle_a_ = std::pow(a, 1.0 / (2.0 * (1.0 - a))) /
              std::sqrt(2.0 * std::numbers::pi * (1.0 - a));
  saddle_c1_ = (a - 2.0) * (1.0 - 2.0 * a) / (24.0 * a * (1.0 - a));

  // Calibrate the switch point: scan down in x and keep the point of best
  // agreement between the two branches while the series is still well
  // conditioned (limited cancellation).
  double best_x = 0.0, best_rel = 1e300;
  for (double x = 0.5; x > 1e-4; x /= 1.12) {
    double cancel = 0.0;
    double s;
    try {
      s = series_density1_impl(x, &cancel);
    } catch (const SeriesError&) {
      break;
    }
    if (cancel > 1e8 || !(s > 0.0)) break;
    const double sp = saddle_density1(x);
    const double rel = std::abs(s - sp) / std::max(s, 1e-300);
    if (rel < best_rel) {
      best_rel = rel;
      best_x = x;
    }
    if (rel <= 1e-9) {
      // Good enough; prefer the smallest such point to maximise the
      // series region.
      best_rel = rel;
      best_x = x;
    }
  }
  if (best_x == 0.0) {
    best_x = 1e-4;
    best_rel = 1.0;
  }
  x0_ = best_x;
  x0_agreement_ = best_rel;
}

double StableDensity::series_density1_impl(double x,
                                           double* cancellation) const {
  if (!(x > 0.0)) return 0.0;
  const long double y = std::pow(static_cast<long double>(x),
                                 -static_cast<long double>(gb_));
  long double yk = 1.0L;
  long double sum = 0.0L, comp = 0.0L;  // Kahan
  long double max_term = 0.0L;
  int k_at_max = 0;
  long double tail1 = 0.0L, tail2 = 0.0L;  // last two term magnitudes
  for (int k = 1; k <= kTermCap; ++k) {
    yk *= y;
    const long double term = coeff_[k] * yk;
    const long double t_abs = std::abs(term);
    if (t_abs > max_term) {
      max_term = t_abs;
      k_at_max = k;
    }
    tail2 = tail1;
    tail1 = t_abs;
    const long double yc = term - comp;
    const long double t = sum + yc;
    comp = (t - sum) - yc;
    sum = t;
    // Zero terms occur for rational indices; require two consecutive small
    // magnitudes past the hump before declaring convergence.
    if (k >= k_at_max + 2 &&
        std::max(tail1, tail2) <= std::abs(sum) * 1e-19L) {
      const long double value = sum / x;
      if (cancellation != nullptr)
        *cancellation = static_cast<double>(
            max_term / std::max(std::abs(sum), 1e-300L));
      return static_cast<double>(value);
    }
  }
  throw SeriesError("stable series did not converge within " +
                    std::to_string(kTermCap) + " terms at x=" +
                    std::to_string(x));
}

double StableDensity::series_density1(double x) const {
  return series_density1_impl(x, nullptr);
}

double StableDensity::saddle_density1(double x) const {
  if (!(x > 0.0)) return 0.0;
  const double lam = std::pow(x / gb_, saddle_expo_);  // 1 / lambda0^gb
  const double expo = saddle_b_ * std::pow(x, -saddle_expo_);
  return saddle_a_ * std::pow(x, saddle_pow_) * std::exp(-expo) *
         (1.0 + saddle_c1_ * lam);
}

double StableDensity::density1(double x) const {
  if (!(x > 0.0)) return 0.0;
  if (x >= x0_) return series_density1(x);
  return saddle_density1(x);
}

double StableDensity::density(double t, double z) const {
  if (!(t > 0.0)) throw std::invalid_argument("density: time must be positive");
  if (!(z > 0.0)) return 0.0;
  const double s = std::pow(t, inv_gb_);
  return density1(z / s) / s;
}

double StableDensity::tail_integral1(double x) const {
  if (!(x > 0.0)) throw std::invalid_argument("tail_integral1: bad argument");
  const long double y = std::pow(static_cast<long double>(x),
                                 -static_cast<long double>(gb_));
  long double yk = 1.0L;
  long double sum = 0.0L, comp = 0.0L;
  long double max_term = 0.0L;
  int k_at_max = 0;
  long double tail1 = 0.0L, tail2 = 0.0L;
  for (int k = 1; k <= kTermCap; ++k) {
    yk *= y;
    const long double term = coeff_[k] * yk / (k * gb_);
    const long double t_abs = std::abs(term);
    if (t_abs > max_term) {
      max_term = t_abs;
      k_at_max = k;
    }
    tail2 = tail1;
    tail1 = t_abs;
    const long double yc = term - comp;
    const long double t = sum + yc;
    comp = (t - sum) - yc;
    sum = t;
    if (k >= k_at_max + 2 &&
        std::max(tail1, tail2) <= std::abs(sum) * 1e-19L) {
      if (max_term > std::abs(sum) * 1e8L)
        throw SeriesError("tail_integral1: cancellation too severe");
      return static_cast<double>(sum);
    }
  }
  throw SeriesError("tail_integral1: series did not converge");
}

double StableDensity::occupation_integral(double z) const {
  if (!(z > 0.0))
    throw std::invalid_argument("occupation_integral: bad position");
  return std::pow(z, -(1.0 - gb_)) / std::tgamma(gb_);
}

double bridge_fdd(const StableDensity& law, const BridgeQuery& q) {
  if (!(q.t > 0.0) || !(q.z > 0.0))
    throw std::invalid_argument("bridge_fdd: bad horizon or endpoint");
  if (q.times.size() != q.values.size())
    throw std::invalid_argument("bridge_fdd: times/values size mismatch");
  double prev_s = 0.0, prev_y = 0.0;
  double prod = 1.0;
  for (std::size_t i = 0; i < q.times.size(); ++i) {
    const double s = q.times[i], y = q.values[i];
    if (!(s > prev_s) || s >= 1.0)
      throw std::invalid_argument("bridge_fdd: times must increase in (0,1)");
    if (y >= q.z) throw std::invalid_argument("bridge_fdd: values must stay below z");
    prod *= law.density(q.t * (s - prev_s), y - prev_y);
    prev_s = s;
    prev_y = y;
  }
  prod *= law.density(q.t * (1.0 - prev_s), q.z - prev_y);
  return prod / law.density(q.t, q.z);
}

double bridge_increment_quantile(const StableDensity& law, double d1,
                                 double d2, double total, double p) {
  if (!(d1 > 0.0) || !(d2 > 0.0) || !(total > 0.0))
    throw std::invalid_argument("bridge_increment_quantile: bad arguments");
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("bridge_increment_quantile: p outside (0,1)");
  auto f = [&](double v) {
    return law.density(d1, v) * law.density(d2, total - v);
  };
  // The conditional density vanishes rapidly at both endpoints; fixed
  // Gauss-Kronrod panels on a uniform split resolve it well.
  constexpr int kPanels = 48;
  double cdf[kPanels + 1];
  cdf[0] = 0.0;
  const double h = total / kPanels;
  for (int i = 0; i < kPanels; ++i) {
    double v, e;
    detail::gk15(f, i * h, (i + 1) * h, v, e);
    cdf[i + 1] = cdf[i] + std::max(v, 0.0);
  }
  const double norm = cdf[kPanels];
  if (!(norm > 0.0)) {
    // Numerically degenerate split (one side carries everything); return
    // the proportional split as the only sensible value.
    return total * d1 / (d1 + d2);
  }
  const double target = p * norm;
  int i = 0;
  while (i < kPanels && cdf[i + 1] < target) ++i;
  // Refine within panel i by bisection on the sub-CDF.
  double lo = i * h, hi = (i + 1) * h;
  double acc = cdf[i];
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    double v, e;
    detail::gk15(f, lo, mid, v, e);
    if (acc + v < target) {
      acc += v;
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-12 * total) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace levypass
