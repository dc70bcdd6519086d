#include "levypass/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "levypass/quadrature.hpp"

namespace levypass::laws {

namespace {
double gamma_ratio(double num, double den) {
  return std::exp(std::lgamma(num) - std::lgamma(den));
}
}  // namespace

double overshoot_density(TailCase c, double alpha, double x) {
  if (x < 0) return 0.0;
  if (c == TailCase::RegularVariation) {
    if (!(alpha > 0)) throw std::invalid_argument("overshoot: alpha must be positive");
    return alpha * std::pow(1.0 + x, -1.0 - alpha);
  }
  return std::exp(-x);
}

double overshoot_cdf(TailCase c, double alpha, double x) {
  if (x <= 0) return 0.0;
  if (c == TailCase::RegularVariation) {
    if (!(alpha > 0)) throw std::invalid_argument("overshoot: alpha must be positive");
    return 1.0 - std::pow(1.0 + x, -alpha);
  }
  return -std::expm1(-x);
}

double passage_local_density(TailCase c, double beta, double t) {
  if (t < 0) return 0.0;
  if (c == TailCase::RegularVariation) {
    if (!(beta > 1)) throw std::invalid_argument("passage_local: beta must exceed 1");
    return (beta - 1.0) * std::pow(1.0 + t, -beta);
  }
  return std::exp(-t);
}

double passage_local_cdf(TailCase c, double beta, double t) {
  if (t <= 0) return 0.0;
  if (c == TailCase::RegularVariation) {
    if (!(beta > 1)) throw std::invalid_argument("passage_local: beta must exceed 1");
    return 1.0 - std::pow(1.0 + t, 1.0 - beta);
  }
  return -std::expm1(-t);
}

double joint_vu_density(TailCase c, double beta, double z, double x) {
  if (z < 0 || x < 0) return 0.0;
  if (c == TailCase::RegularVariation) {
    if (!(beta > 1)) throw std::invalid_argument("joint_vu: beta must exceed 1");
    return beta * (beta - 1.0) * std::pow(1.0 + z + x, -beta - 1.0);
  }
  return std::exp(-z - x);
}

double undershoot_factor(TailCase c, double beta, double gamma, double z) {
  if (z < 0) return 0.0;
  if (c == TailCase::RegularVariation) {
    if (!(beta + gamma - 1.0 > 0))
      throw std::invalid_argument("undershoot_factor: beta + gamma must exceed 1");
    return gamma_ratio(beta, beta + gamma - 1.0) * std::pow(1.0 + z, -beta);
  }
  return std::exp(-z);
}

double joint_vuw_density(TailCase c, double beta, const StableDensity& law,
                         double z, double x, double t) {
  if (z <= 0 || x < 0 || t <= 0) return 0.0;
  const double h = law.density(t, z);
  if (c == TailCase::RegularVariation) {
    const double gamma = law.gamma();
    if (!(beta + gamma - 1.0 > 0))
      throw std::invalid_argument("joint_vuw: beta + gamma must exceed 1");
    return gamma_ratio(beta + 1.0, beta + gamma - 1.0) *
           std::pow(1.0 + z + x, -beta - 1.0) * h;
  }
  return std::exp(-z - x) * h;
}

double marginal_vu_density(TailCase c, double beta, double gamma, double z,
                           double x) {
  if (z <= 0 || x < 0) return 0.0;
  const double occ = std::pow(z, -gamma) / std::tgamma(1.0 - gamma);
  if (c == TailCase::RegularVariation) {
    return gamma_ratio(beta + 1.0, beta + gamma - 1.0) *
           std::pow(1.0 + z + x, -beta - 1.0) * occ;
  }
  return occ * std::exp(-z - x);
}

double marginal_v_density(TailCase c, double beta, double gamma, double z) {
  if (z <= 0) return 0.0;
  return undershoot_factor(c, beta, gamma, z) * std::pow(z, -gamma) /
         std::tgamma(1.0 - gamma);
}

double marginal_w_density(TailCase c, double beta, const StableDensity& law,
                          double t) {
  if (t <= 0) return 0.0;
  const double scale = std::pow(t, 1.0 / law.gamma_bar());
  QuadratureOptions opt;
  opt.rel_tol = 1e-10;
  if (c == TailCase::RegularVariation) {
    const double gamma = law.gamma();
    const double front = gamma_ratio(beta, beta + gamma - 1.0);
    auto f = [&](double v) {
      return law.density1(v) * std::pow(1.0 + scale * v, -beta);
    };
    return front * integrate_to_inf(f, 0.0, opt);
  }
  auto f = [&](double v) { return law.density1(v) * std::exp(-scale * v); };
  return integrate_to_inf(f, 0.0, opt);
}

double fdd_theta(TailCase c, double beta, const StableDensity& law,
                 std::span<const double> z, std::span<const double> times,
                 double t) {
  if (z.empty()) throw std::invalid_argument("fdd_theta: empty coordinates");
  if (times.size() + 1 != z.size())
    throw std::invalid_argument("fdd_theta: need one fewer time than coordinates");
  if (!(t > 0)) throw std::invalid_argument("fdd_theta: bad horizon");
  double prev_s = 0.0, prev_z = 0.0;
  double prod = 1.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double s = (i + 1 == z.size()) ? 1.0 : times[i];
    if (!(s > prev_s) || s > 1.0)
      throw std::invalid_argument("fdd_theta: times must increase within (0,1)");
    prod *= law.density(t * (s - prev_s), z[i] - prev_z);
    if (prod == 0.0) return 0.0;
    prev_s = s;
    prev_z = z[i];
  }
  return prod * undershoot_factor(c, beta, law.gamma(), z.back());
}

Constants constants(double gamma, double beta, TailCase c) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("constants: gamma outside [0,1)");
  Constants out;
  out.k_gamma =
      1.0 / (std::tgamma(1.0 + gamma) * std::tgamma(2.0 - gamma));
  if (gamma > 0.0) {
    out.c_gamma_beta = (c == TailCase::RegularVariation)
                           ? std::tgamma(gamma + 1.0) *
                                 gamma_ratio(beta, beta + gamma - 1.0)
                           : std::tgamma(gamma + 1.0);
  } else {
    out.c_gamma_beta = (c == TailCase::RegularVariation) ? beta - 1.0 : 1.0;
  }
  return out;
}

double c_ledger(double gamma, double beta, TailCase c, double eh1_star,
                double d_hstar) {
  const double base = constants(gamma, beta, c).c_gamma_beta;
  if (std::isinf(eh1_star)) return base;
  if (!(eh1_star > d_hstar && d_hstar >= 0.0))
    throw std::invalid_argument("c_ledger: need EH1* > d_H* >= 0");
  if (gamma > 0.0) {
    const double extra = (c == TailCase::RegularVariation)
                             ? (beta - 1.0) * d_hstar / eh1_star
                             : d_hstar / eh1_star;
    return base + extra;
  }
  // gamma = 0, finite mean: base scaled by EH1* / A_{H*}(inf).
  return base * eh1_star / (eh1_star - d_hstar);
}

TabulatedCdf::TabulatedCdf(std::function<double(double)> density, double upper,
                           int cells) {
  if (!(upper > 0) || cells < 2)
    throw std::invalid_argument("TabulatedCdf: bad grid");
  x_.resize(cells + 1);
  F_.resize(cells + 1);
  const double h = upper / cells;
  x_[0] = 0.0;
  F_[0] = 0.0;
  for (int i = 0; i < cells; ++i) {
    double v, e;
    detail::gk15(density, i * h, (i + 1) * h, v, e);
    x_[i + 1] = (i + 1) * h;
    F_[i + 1] = F_[i] + std::max(v, 0.0);
  }
}

double TabulatedCdf::operator()(double x) const {
  if (x <= x_.front()) return 0.0;
  if (x >= x_.back()) return F_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double w = (x - x_[i]) / (x_[i + 1] - x_[i]);
  return F_[i] + w * (F_[i + 1] - F_[i]);
}

std::function<double(double)> marginal_v_cdf(TailCase c, double beta,
                                             double gamma) {
  // Substitute z = w^{1/(1-gamma)} to remove the z^-gamma singularity,
  // tabulate in w, map back on evaluation.
  const double p = 1.0 / (1.0 - gamma);
  auto smooth = [=](double w) {
    if (w <= 0) return 0.0;
    const double z = std::pow(w, p);
    return marginal_v_density(c, beta, gamma, z) * p * std::pow(w, p - 1.0);
  };
  const double upper_z = 400.0;
  auto table = std::make_shared<TabulatedCdf>(
      smooth, std::pow(upper_z, 1.0 - gamma), 2000);
  return [table, gamma](double z) {
    if (z <= 0) return 0.0;
    return (*table)(std::pow(z, 1.0 - gamma));
  };
}

std::function<double(double)> marginal_w_cdf(TailCase c, double beta,
                                             const StableDensity& law) {
  auto dens = [&law, beta, c](double t) {
    return marginal_w_density(c, beta, law, t);
  };
  auto table = std::make_shared<TabulatedCdf>(dens, 60.0, 1200);
  return [table](double t) { return (*table)(t); };
}

}  // namespace levypass::laws
