#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "levypass/rng.hpp"

namespace levypass {

enum class JumpKind { Pareto, Weibull, Lognormal };

// Positive jump size distribution. Pareto uses the shifted survival
// (1 + x/s)^-beta so survival(0) = 1 for every family.
struct JumpFamily {
  JumpKind kind = JumpKind::Pareto;
  double shape = 2.0;   // Pareto beta, Weibull kappa, Lognormal sigma
  double scale = 1.0;   // Pareto/Weibull scale, Lognormal location mu

  static JumpFamily pareto(double beta, double scale);
  static JumpFamily weibull(double kappa, double scale);
  static JumpFamily lognormal(double mu, double sigma);

  double survival(double x) const;        // S(x), x >= 0
  double mean() const;                    // may be +inf
  double tail_integral(double x) const;   // int_x^inf S(y) dy
  double integral_1_to(double x) const;   // int_1^x S(y) dy, x >= 1

  template <typename Rng>
  double sample(Rng& rng) const {
    switch (kind) {
      case JumpKind::Pareto:
        return scale * (std::pow(rng.uniform(), -1.0 / shape) - 1.0);
      case JumpKind::Weibull:
        return scale * std::pow(rng.exponential(), 1.0 / shape);
      case JumpKind::Lognormal:
        return std::exp(scale + shape * rng.normal());
    }
    return 0.0;
  }

  std::string describe() const;
};

enum class NegKind { Drift, CompoundPoisson, StableSubordinator };

// Downward part of the process between positive jumps. The stable
// subordinator with scale kappa has Laplace exponent kappa * lambda^gbar and
// jump tail kappa * x^-gbar / Gamma(1-gbar); kappa=1 is the standard one.
struct NegativeComponent {
  NegKind kind = NegKind::Drift;
  double drift_rate = 1.0;
  JumpFamily step{};
  double rate = 0.0;
  double gamma_bar = 0.5;
  double stable_scale = 1.0;

  static NegativeComponent drift(double c);
  static NegativeComponent compound_poisson(JumpFamily step, double rate);
  static NegativeComponent stable(double gamma_bar, double scale = 1.0);
};

enum class TailCase { RegularVariation, Gumbel };

struct RegimeTag {
  TailCase tail_case = TailCase::RegularVariation;
  double gamma = 0.0;
  bool finite_mean = true;
  double beta = std::numeric_limits<double>::quiet_NaN();  // RV case only
};

struct ModelSpec {
  JumpFamily positive{};
  double lambda_pos = 1.0;
  NegativeComponent negative{};
  // Triplet bookkeeping; every implemented family is purely non-Gaussian.
  double shift = 0.0;
  double gaussian_var = 0.0;

  ModelSpec() = default;
  ModelSpec(JumpFamily pos, double lambda, NegativeComponent neg);

  double pos_tail(double x) const;            // lambda * S(x), x > 0
  double neg_tail(double x) const;            // x > 0
  double truncated_mean_pos(double x) const;  // int_1^x pos_tail, x > 1
  double truncated_mean_neg(double x) const;  // int_1^x neg_tail, x > 1
  double pos_tail_integral(double x) const;   // int_x^inf pos_tail
  double mean_x1() const;                     // in [-inf, 0); throws if >= 0
  RegimeTag classify() const;
  void validate() const { (void)classify(); }
};

}  // namespace levypass
