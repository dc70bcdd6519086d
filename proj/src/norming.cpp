#include "levypass/norming.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace levypass {

namespace {

struct NormingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace

double increasing_branch_start(
    const std::function<double(double)>& trunc_mean) {
  auto b_of = [&](double y) { return y / trunc_mean(y); };
  // Golden-section in log y.
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::log(1.0 + 1e-9), b = std::log(1e12);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = b_of(std::exp(x1)), f2 = b_of(std::exp(x2));
  while (b - a > 1e-12) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = b_of(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = b_of(std::exp(x2));
    }
  }
  return std::exp(0.5 * (a + b));
}

double solve_growth_equation(const std::function<double(double)>& trunc_mean,
                             double t, double y_min) {
  if (!(t > 0)) throw std::invalid_argument("solve_growth_equation: bad time");
  auto f = [&](double y) { return y / trunc_mean(y) - t; };
  const double t_min = y_min / trunc_mean(y_min);
  if (t < t_min * (1.0 - 1e-12))
    throw std::domain_error(
        "solve_growth_equation: no root below t=" + std::to_string(t_min));
  double lo = y_min, hi = 2.0 * y_min;
  int guard = 0;
  while (f(hi) < 0.0) {
    hi *= 4.0;
    if (++guard > 300) throw NormingError("solve_growth_equation: no bracket");
  }
  if (f(lo) > 0.0) return y_min;  // t == t_min within roundoff
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) <= 0.0)
      lo = mid;
    else
      hi = mid;
    if ((hi - lo) <= 1e-13 * hi) {
      const double c = 0.5 * (lo + hi);
      const double resid = std::abs(c - t * trunc_mean(c)) / c;
      if (resid > 1e-9)
        throw NormingError("solve_growth_equation: residual " +
                           std::to_string(resid));
      return c;
    }
  }
  throw NormingError("solve_growth_equation: 200 bisections exhausted");
}

NormingBundle::NormingBundle(const ModelSpec& model)
    : model_(model), regime_(model.classify()) {
  if (regime_.gamma > 0.0) {
    growth_kind_ = GrowthKind::StablePower;
    inv_gamma_bar_ = 1.0 / model_.negative.gamma_bar;
    return;
  }
  if (regime_.finite_mean) {
    growth_kind_ = GrowthKind::LinearMean;
    abs_mean_ = -model_.mean_x1();
    return;
  }
  growth_kind_ = GrowthKind::TruncatedMeanRoot;
  auto A = [this](double y) { return model_.truncated_mean_neg(y); };
  y_min_ = increasing_branch_start(A);
  t_min_ = y_min_ / A(y_min_);
}

double NormingBundle::space_scale(double u) const {
  if (!(u > 0))
    throw std::invalid_argument("space_scale: level must be positive");
  if (regime_.tail_case == TailCase::RegularVariation) return u;
  return model_.positive.tail_integral(u) / model_.positive.survival(u);
}

double NormingBundle::inverse_growth(double y) const {
  if (!(y > 0)) throw std::invalid_argument("inverse_growth: bad argument");
  switch (growth_kind_) {
    case GrowthKind::LinearMean:
      return y / abs_mean_;
    case GrowthKind::StablePower:
      return std::pow(y, model_.negative.gamma_bar) /
             model_.negative.stable_scale;
    case GrowthKind::TruncatedMeanRoot:
      if (y <= 1.0)
        throw std::domain_error(
            "inverse_growth: argument below the usable range");
      return y / model_.truncated_mean_neg(y);
  }
  return 0.0;
}

double NormingBundle::growth(double t) const {
  if (!(t > 0)) throw std::invalid_argument("growth: time must be positive");
  switch (growth_kind_) {
    case GrowthKind::LinearMean:
      return abs_mean_ * t;
    case GrowthKind::StablePower:
      return std::pow(model_.negative.stable_scale * t, inv_gamma_bar_);
    case GrowthKind::TruncatedMeanRoot: {
      auto A = [this](double y) { return model_.truncated_mean_neg(y); };
      return solve_growth_equation(A, t, y_min_);
    }
  }
  return 0.0;
}

}  // namespace levypass
