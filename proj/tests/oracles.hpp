#pragma once

// Test-side reference implementations, kept independent of the library's
// numerical paths on purpose.

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace oracle {

namespace detail {
inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

// Plain adaptive Simpson; a deliberately different quadrature family from
// the library's Gauss-Kronrod scheme.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, double tol = 1e-10, int depth = 40) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

// Zolotarev's integral representation of the one-sided stable density with
// Laplace transform exp(-lambda^alpha), 0 < alpha < 1.
inline double stable_density_integral(double alpha, double x) {
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha");
  if (!(x > 0)) return 0.0;
  const double r = alpha / (1.0 - alpha);
  const double c = std::pow(x, -r);
  // factor the kernel minimum out so the integrand stays O(1)
  const double v_min = std::pow(alpha, r) * (1.0 - alpha);
  auto kernel = [&](double th) {
    if (th < 1e-12 || th > std::numbers::pi - 1e-9) return 0.0;
    const double v = std::pow(std::sin(alpha * th) / std::sin(th), r) *
                     std::sin((1.0 - alpha) * th) / std::sin(th);
    const double e = c * (v - v_min);
    return e > 700.0 ? 0.0 : v * std::exp(-e);
  };
  const double integral =
      simpson(kernel, 1e-12, std::numbers::pi - 1e-9, 1e-13, 44);
  return (alpha / (std::numbers::pi * (1.0 - alpha))) *
         std::pow(x, -1.0 / (1.0 - alpha)) * std::exp(-c * v_min) * integral;
}

// Closed forms for the alpha = 1/2 case.
inline double levy_density(double x) {
  if (!(x > 0)) return 0.0;
  return std::exp(-0.25 / x) /
         (2.0 * std::sqrt(std::numbers::pi) * std::pow(x, 1.5));
}

inline double levy_cdf(double x) {
  if (!(x > 0)) return 0.0;
  return std::erfc(0.5 / std::sqrt(x));
}

}  // namespace oracle
