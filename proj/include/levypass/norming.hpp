#pragma once

#include <functional>

#include "levypass/model.hpp"

namespace levypass {

// The map y -> y / A(y) for a slowly varying truncated mean A blows up at
// both ends of its domain; invertibility holds past the interior minimum.
// Returns the minimiser of y / A(y) on (1, inf).
double increasing_branch_start(const std::function<double(double)>& trunc_mean);

// Solves c = t * A(c) on the increasing branch [y_min, inf) by bisection.
// Throws on bracketing/convergence failure or when t is below the branch.
double solve_growth_equation(const std::function<double(double)>& trunc_mean,
                             double t, double y_min);

// Space and time normalisations attached to one model:
//   a(u)  space scale for undershoot/overshoot,
//   c(t)  growth scale of the dual process,
//   b(y)  inverse of c,
//   r(u) = b(a(u)) time scale for the passage time.
class NormingBundle {
 public:
  explicit NormingBundle(const ModelSpec& model);

  double space_scale(double u) const;     // a(u)
  double growth(double t) const;          // c(t)
  double inverse_growth(double y) const;  // b(y)
  double passage_scale(double u) const {
    return inverse_growth(space_scale(u));
  }

  const RegimeTag& regime() const { return regime_; }
  // Smallest t for which c(t) is defined (above 0 only on the slowly
  // varying branch, where the defining equation has no root for small t).
  double growth_domain_start() const { return t_min_; }

 private:
  enum class GrowthKind { LinearMean, StablePower, TruncatedMeanRoot };

  ModelSpec model_;
  RegimeTag regime_;
  GrowthKind growth_kind_;
  double abs_mean_ = 0.0;       // LinearMean
  double inv_gamma_bar_ = 0.0;  // StablePower
  double y_min_ = 0.0;          // TruncatedMeanRoot
  double t_min_ = 0.0;
};

}  // namespace levypass
