#include "levypass/model.hpp"

#include <cmath>

#include "levypass/special.hpp"

namespace levypass {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

JumpFamily JumpFamily::pareto(double beta, double scale) {
  require(beta > 0 && scale > 0, "pareto: shape and scale must be positive");
  return {JumpKind::Pareto, beta, scale};
}

JumpFamily JumpFamily::weibull(double kappa, double scale) {
  // kappa = 1 (exponential steps) is allowed for random-walk use; regime
  // classification rejects it as a positive jump family.
  require(kappa > 0 && kappa <= 1 && scale > 0,
          "weibull: shape in (0,1], scale positive");
  return {JumpKind::Weibull, kappa, scale};
}

JumpFamily JumpFamily::lognormal(double mu, double sigma) {
  require(sigma > 0, "lognormal: sigma must be positive");
  return {JumpKind::Lognormal, sigma, mu};
}

double JumpFamily::survival(double x) const {
  if (x < 0) throw std::invalid_argument("survival: negative argument");
  switch (kind) {
    case JumpKind::Pareto:
      return std::pow(1.0 + x / scale, -shape);
    case JumpKind::Weibull:
      return std::exp(-std::pow(x / scale, shape));
    case JumpKind::Lognormal: {
      if (x == 0) return 1.0;
      return normal_sf((std::log(x) - scale) / shape);
    }
  }
  return 0.0;
}

double JumpFamily::mean() const {
  switch (kind) {
    case JumpKind::Pareto:
      return shape > 1 ? scale / (shape - 1.0) : kInf;
    case JumpKind::Weibull:
      return scale * std::tgamma(1.0 + 1.0 / shape);
    case JumpKind::Lognormal:
      return std::exp(scale + 0.5 * shape * shape);
  }
  return kInf;
}

double JumpFamily::tail_integral(double x) const {
  if (x < 0) throw std::invalid_argument("tail_integral: negative argument");
  switch (kind) {
    case JumpKind::Pareto: {
      if (shape <= 1) return kInf;
      return scale * std::pow(1.0 + x / scale, 1.0 - shape) / (shape - 1.0);
    }
    case JumpKind::Weibull: {
      const double z = std::pow(x / scale, shape);
      return (scale / shape) * upper_inc_gamma(1.0 / shape, z);
    }
    case JumpKind::Lognormal: {
      // int_x^inf SF dy = E * Phi_bar(w - sigma) - x * Phi_bar(w),
      // w = (ln x - mu) / sigma.
      if (x == 0) return mean();
      const double w = (std::log(x) - scale) / shape;
      return mean() * normal_sf(w - shape) - x * normal_sf(w);
    }
  }
  return 0.0;
}

double JumpFamily::integral_1_to(double x) const {
  if (x < 1) throw std::invalid_argument("integral_1_to: x below 1");
  switch (kind) {
    case JumpKind::Pareto: {
      if (shape == 1.0)
        return scale * std::log((scale + x) / (scale + 1.0));
      return scale / (shape - 1.0) *
             (std::pow(1.0 + 1.0 / scale, 1.0 - shape) -
              std::pow(1.0 + x / scale, 1.0 - shape));
    }
    case JumpKind::Weibull: {
      const double z1 = std::pow(1.0 / scale, shape);
      const double zx = std::pow(x / scale, shape);
      return (scale / shape) *
             (upper_inc_gamma(1.0 / shape, z1) -
              upper_inc_gamma(1.0 / shape, zx));
    }
    case JumpKind::Lognormal:
      return tail_integral(1.0) - tail_integral(x);
  }
  return 0.0;
}

std::string JumpFamily::describe() const {
  switch (kind) {
    case JumpKind::Pareto:
      return "pareto(beta=" + std::to_string(shape) +
             ",s=" + std::to_string(scale) + ")";
    case JumpKind::Weibull:
      return "weibull(kappa=" + std::to_string(shape) +
             ",s=" + std::to_string(scale) + ")";
    case JumpKind::Lognormal:
      return "lognormal(mu=" + std::to_string(scale) +
             ",sigma=" + std::to_string(shape) + ")";
  }
  return "?";
}

NegativeComponent NegativeComponent::drift(double c) {
  require(c > 0, "drift rate must be positive");
  NegativeComponent n;
  n.kind = NegKind::Drift;
  n.drift_rate = c;
  return n;
}

NegativeComponent NegativeComponent::compound_poisson(JumpFamily step,
                                                      double rate) {
  require(rate > 0, "negative jump rate must be positive");
  NegativeComponent n;
  n.kind = NegKind::CompoundPoisson;
  n.step = step;
  n.rate = rate;
  return n;
}

NegativeComponent NegativeComponent::stable(double gamma_bar, double scale) {
  require(gamma_bar > 0 && gamma_bar < 1, "stable index must be in (0,1)");
  require(scale > 0, "stable scale must be positive");
  NegativeComponent n;
  n.kind = NegKind::StableSubordinator;
  n.gamma_bar = gamma_bar;
  n.stable_scale = scale;
  return n;
}

ModelSpec::ModelSpec(JumpFamily pos, double lambda, NegativeComponent neg)
    : positive(pos), lambda_pos(lambda), negative(neg) {
  require(lambda > 0, "positive jump rate must be positive");
}

double ModelSpec::pos_tail(double x) const {
  if (!(x > 0)) throw std::invalid_argument("pos_tail: level must be positive");
  return lambda_pos * positive.survival(x);
}

double ModelSpec::neg_tail(double x) const {
  if (!(x > 0)) throw std::invalid_argument("neg_tail: level must be positive");
  switch (negative.kind) {
    case NegKind::Drift:
      return 0.0;
    case NegKind::CompoundPoisson:
      return negative.rate * negative.step.survival(x);
    case NegKind::StableSubordinator:
      return negative.stable_scale * std::pow(x, -negative.gamma_bar) /
             std::tgamma(1.0 - negative.gamma_bar);
  }
  return 0.0;
}

double ModelSpec::truncated_mean_pos(double x) const {
  if (!(x > 1)) throw std::invalid_argument("truncated_mean_pos: x must exceed 1");
  return lambda_pos * positive.integral_1_to(x);
}

double ModelSpec::truncated_mean_neg(double x) const {
  if (!(x > 1)) throw std::invalid_argument("truncated_mean_neg: x must exceed 1");
  switch (negative.kind) {
    case NegKind::Drift:
      return 0.0;
    case NegKind::CompoundPoisson:
      return negative.rate * negative.step.integral_1_to(x);
    case NegKind::StableSubordinator: {
      const double gb = negative.gamma_bar;
      return negative.stable_scale * (std::pow(x, 1.0 - gb) - 1.0) /
             std::tgamma(2.0 - gb);
    }
  }
  return 0.0;
}

double ModelSpec::pos_tail_integral(double x) const {
  if (!(x >= 0)) throw std::invalid_argument("pos_tail_integral: bad level");
  return lambda_pos * positive.tail_integral(x);
}

double ModelSpec::mean_x1() const {
  const double up = lambda_pos * positive.mean();
  double m;
  switch (negative.kind) {
    case NegKind::Drift:
      m = up - negative.drift_rate;
      break;
    case NegKind::CompoundPoisson: {
      const double down = negative.rate * negative.step.mean();
      if (std::isinf(up) && std::isinf(down))
        throw std::invalid_argument("mean_x1: both jump means infinite");
      m = up - down;
      break;
    }
    case NegKind::StableSubordinator:
      m = -kInf;
      break;
  }
  if (!(m < 0))
    throw std::invalid_argument("mean_x1: process does not drift to -inf");
  return m;
}

RegimeTag ModelSpec::classify() const {
  RegimeTag tag;
  switch (positive.kind) {
    case JumpKind::Pareto:
      tag.tail_case = TailCase::RegularVariation;
      tag.beta = positive.shape;
      break;
    case JumpKind::Weibull:
      if (positive.shape >= 1)
        throw std::invalid_argument(
            "classify: weibull positive jumps need shape < 1");
      tag.tail_case = TailCase::Gumbel;
      break;
    case JumpKind::Lognormal:
      tag.tail_case = TailCase::Gumbel;
      break;
  }

  switch (negative.kind) {
    case NegKind::Drift: {
      tag.gamma = 0.0;
      tag.finite_mean = true;
      (void)mean_x1();  // enforces drift to -inf
      break;
    }
    case NegKind::CompoundPoisson: {
      tag.gamma = 0.0;
      const double neg_mean = negative.step.mean();
      if (std::isfinite(neg_mean)) {
        tag.finite_mean = true;
        (void)mean_x1();
      } else {
        // Slowly varying truncated mean needs tail index exactly -1.
        if (!(negative.step.kind == JumpKind::Pareto &&
              negative.step.shape == 1.0))
          throw std::invalid_argument(
              "classify: infinite-mean negative jumps supported only with "
              "tail index 1");
        tag.finite_mean = false;
      }
      break;
    }
    case NegKind::StableSubordinator: {
      tag.gamma = 1.0 - negative.gamma_bar;
      tag.finite_mean = false;
      break;
    }
  }

  if (tag.tail_case == TailCase::RegularVariation) {
    const double floor = tag.gamma == 0.0 ? 1.0 : 1.0 - tag.gamma;
    if (!(tag.beta > floor))
      throw std::invalid_argument(
          "classify: pareto shape must exceed " + std::to_string(floor) +
          " in this regime");
  }
  return tag;
}

}  // namespace levypass
