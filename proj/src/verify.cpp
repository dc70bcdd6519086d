#include "levypass/verify.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "levypass/limit_laws.hpp"
#include "levypass/quadrature.hpp"

namespace levypass {

double ecdf_value(std::span<const double> sorted, double x) {
  if (sorted.empty()) throw std::invalid_argument("ecdf: empty sample");
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) /
         static_cast<double>(sorted.size());
}

double ks_distance(std::vector<double> samples,
                   const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  return d;
}

double wasserstein1(std::vector<double> samples,
                    const std::function<double(double)>& cdf, double upper) {
  if (samples.empty()) throw std::invalid_argument("wasserstein1: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  QuadratureOptions opt;
  opt.rel_tol = 1e-8;
  opt.abs_tol = 1e-9;

  // Integrate |F(x) - level| over each inter-sample segment, splitting at
  // the crossing point when the level is straddled.
  auto segment = [&](double a, double b, double level) -> double {
    if (!(b > a)) return 0.0;
    const double fa = cdf(a), fb = cdf(b);
    auto above = [&](double x0, double x1) {
      return integrate([&](double x) { return cdf(x) - level; }, x0, x1, opt);
    };
    auto below = [&](double x0, double x1) {
      return integrate([&](double x) { return level - cdf(x); }, x0, x1, opt);
    };
    if (fa >= level) return above(a, b);
    if (fb <= level) return below(a, b);
    double lo = a, hi = b;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < level ? lo : hi) = mid;
    }
    return below(a, lo) + above(lo, b);
  };

  double total = 0.0;
  double left = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    total += segment(left, samples[i], static_cast<double>(i) / n);
    left = samples[i];
  }
  if (upper > left)
    total += integrate([&](double x) { return 1.0 - cdf(x); }, left, upper, opt);
  return total;
}

EcdfReport make_ecdf_report(std::vector<double> samples,
                            const std::function<double(double)>& cdf,
                            const std::function<double(double)>& quantile,
                            std::string law_id, double norm_a, double norm_r,
                            double w1_upper) {
  EcdfReport rep;
  rep.law_id = std::move(law_id);
  rep.norm_a = norm_a;
  rep.norm_r = norm_r;
  rep.n = samples.size();
  rep.ks = ks_distance(samples, cdf);
  rep.wasserstein = wasserstein1(samples, cdf, w1_upper);
  std::sort(samples.begin(), samples.end());
  for (double p : {0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99}) {
    const std::size_t idx = std::min(
        samples.size() - 1,
        static_cast<std::size_t>(p * static_cast<double>(samples.size())));
    rep.quantiles.push_back({p, samples[idx], quantile ? quantile(p) : 0.0});
  }
  return rep;
}

LocalCheck local_density_check(
    std::span<const std::pair<double, double>> zt,
    const std::function<double(double, double)>& target_density, double z_lo,
    double z_hi, double t_lo, double t_hi, int nz, int nt,
    std::uint64_t min_count) {
  if (nz < 1 || nt < 1 || !(z_hi > z_lo) || !(t_hi > t_lo))
    throw std::invalid_argument("local_density_check: bad window");
  LocalCheck out;
  const double n_total = static_cast<double>(zt.size());
  const double dz = (z_hi - z_lo) / nz, dt = (t_hi - t_lo) / nt;

  std::vector<std::uint64_t> counts(static_cast<std::size_t>(nz) * nt, 0);
  std::uint64_t in_window = 0;
  for (const auto& [z, t] : zt) {
    if (z < z_lo || z >= z_hi || t < t_lo || t >= t_hi) continue;
    const int iz = std::min(nz - 1, static_cast<int>((z - z_lo) / dz));
    const int it = std::min(nt - 1, static_cast<int>((t - t_lo) / dt));
    ++counts[static_cast<std::size_t>(iz) * nt + it];
    ++in_window;
  }
  out.n_in_window = in_window;
  if (in_window < min_count) {
    out.insufficient = true;
    return out;
  }

  // 5-point tensor Gauss-Legendre for the expected bin mass.
  static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                               0.5384693101056831, 0.9061798459386640};
  static const double gw[5] = {0.2369268850561891, 0.4786286704993665,
                               0.5688888888888889, 0.4786286704993665,
                               0.2369268850561891};
  auto bin_mass = [&](double za, double zb, double ta, double tb) {
    const double hz = 0.5 * (zb - za), cz = 0.5 * (za + zb);
    const double ht = 0.5 * (tb - ta), ct = 0.5 * (ta + tb);
    double s = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        s += gw[i] * gw[j] *
             target_density(cz + hz * gx[i], ct + ht * gx[j]);
    return s * hz * ht;
  };

  std::size_t passed = 0, used = 0;
  for (int iz = 0; iz < nz; ++iz) {
    // merge adjacent t-cells left to right until each range reaches
    // min_count; a short leftover folds into the preceding range
    std::vector<std::pair<int, int>> ranges;
    int it = 0;
    while (it < nt) {
      int jt = it;
      std::uint64_t c = 0;
      while (jt < nt) {
        c += counts[static_cast<std::size_t>(iz) * nt + jt];
        ++jt;
        if (c >= min_count) break;
      }
      if (c < min_count && !ranges.empty())
        ranges.back().second = jt;
      else
        ranges.emplace_back(it, jt);
      it = jt;
    }
    for (const auto& [a, b] : ranges) {
      LocalBin bin;
      bin.z_lo = z_lo + iz * dz;
      bin.z_hi = bin.z_lo + dz;
      bin.t_lo = t_lo + a * dt;
      bin.t_hi = t_lo + b * dt;
      bin.count = 0;
      for (int k = a; k < b; ++k)
        bin.count += counts[static_cast<std::size_t>(iz) * nt + k];
      bin.expected = n_total * bin_mass(bin.z_lo, bin.z_hi, bin.t_lo, bin.t_hi);
      const double area = (bin.z_hi - bin.z_lo) * (bin.t_hi - bin.t_lo);
      bin.scaled_freq = static_cast<double>(bin.count) / (n_total * area);
      bin.target_density = bin.expected / (n_total * area);
      const double sd = std::sqrt(std::max(bin.expected, 1.0));
      bin.rel_err = (static_cast<double>(bin.count) - bin.expected) /
                    std::max(bin.expected, 1e-300);
      bin.rel_ci = 1.96 * sd / std::max(bin.expected, 1e-300);
      bin.pass =
          std::abs(static_cast<double>(bin.count) - bin.expected) <= 1.96 * sd;
      out.bins.push_back(bin);
    }
  }
  for (const auto& b : out.bins) {
    ++used;
    if (b.pass) ++passed;
  }
  out.pass_fraction =
      used > 0 ? static_cast<double>(passed) / static_cast<double>(used) : 0.0;
  return out;
}

double ks_critical(double alpha, double n) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(n);
}

double ks_critical_two_sample(double alpha, double n1, double n2) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) *
         std::sqrt(1.0 / n1 + 1.0 / n2);
}

namespace {
double two_sample_ks(const std::vector<double>& a,
                     const std::vector<double>& b) {
  double d = 0.0;
  std::size_t i = 0, j = 0;
  const double na = static_cast<double>(a.size()),
               nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}
}  // namespace

ConditionalOvershootReport conditional_overshoot_check(
    std::span<const std::pair<double, double>> zo, TailCase c, double beta,
    int n_strata, double alpha) {
  if (zo.empty())
    throw std::invalid_argument("conditional_overshoot_check: empty sample");
  if (n_strata < 1) throw std::invalid_argument("bad stratum count");
  std::vector<std::pair<double, double>> sorted(zo.begin(), zo.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  if (m < static_cast<std::size_t>(4 * n_strata)) n_strata = 1;

  ConditionalOvershootReport rep;
  std::vector<std::vector<double>> stratum_o(n_strata);
  for (int s = 0; s < n_strata; ++s) {
    const std::size_t lo = m * s / n_strata;
    const std::size_t hi = m * (s + 1) / n_strata;
    StratumReport sr;
    sr.z_lo = sorted[lo].first;
    sr.z_hi = sorted[hi - 1].first;
    sr.n = hi - lo;
    double zsum = 0.0;
    std::vector<double> os;
    os.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
      zsum += sorted[i].first;
      os.push_back(sorted[i].second);
    }
    sr.z_mean = zsum / static_cast<double>(sr.n);
    std::function<double(double)> cdf;
    if (c == TailCase::RegularVariation) {
      // mixture of the conditional law over the stratum's own undershoots;
      // a point evaluation at the stratum mean is badly biased when the
      // stratum is wide
      std::vector<double> zs;
      const std::size_t stride = std::max<std::size_t>(1, sr.n / 512);
      for (std::size_t i = lo; i < hi; i += stride)
        zs.push_back(std::max(0.0, sorted[i].first));
      cdf = [zs, beta](double x) {
        if (x <= 0) return 0.0;
        double acc = 0.0;
        for (double z : zs)
          acc += 1.0 - std::pow((1.0 + z) / (1.0 + z + x), beta);
        return acc / static_cast<double>(zs.size());
      };
    } else {
      cdf = [](double x) { return x <= 0 ? 0.0 : -std::expm1(-x); };
    }
    sr.ks_vs_limit = ks_distance(os, cdf);
    sr.critical =
        ks_critical(alpha / n_strata, static_cast<double>(sr.n));
    sr.pass = sr.ks_vs_limit <= sr.critical;
    std::sort(os.begin(), os.end());
    stratum_o[s] = std::move(os);
    rep.strata.push_back(sr);
  }

  bool all_pass = true;
  for (const auto& s : rep.strata) all_pass = all_pass && s.pass;

  if (c == TailCase::Gumbel && n_strata > 1) {
    const int pairs = n_strata * (n_strata - 1) / 2;
    double worst = 0.0, worst_crit = 1.0;
    for (int i = 0; i < n_strata; ++i) {
      for (int j = i + 1; j < n_strata; ++j) {
        const double d = two_sample_ks(stratum_o[i], stratum_o[j]);
        const double crit = ks_critical_two_sample(
            alpha / pairs, static_cast<double>(stratum_o[i].size()),
            static_cast<double>(stratum_o[j].size()));
        if (d - crit > worst - worst_crit) {
          worst = d;
          worst_crit = crit;
        }
      }
    }
    rep.max_pairwise_ks = worst;
    rep.pairwise_critical = worst_crit;
    rep.pairwise_pass = worst <= worst_crit;
  }
  rep.pass = all_pass && rep.pairwise_pass;
  return rep;
}

LevelTargets make_level_targets(const ModelSpec& model) {
  const RegimeTag tag = model.classify();
  LevelTargets t;
  using laws::marginal_v_cdf;
  using laws::marginal_w_cdf;
  using laws::overshoot_cdf;
  using laws::passage_local_cdf;

  if (tag.gamma == 0.0) {
    if (tag.tail_case == TailCase::RegularVariation) {
      const double beta = tag.beta;
      t.overshoot_cdf = [beta](double x) {
        return overshoot_cdf(TailCase::RegularVariation, beta - 1.0, x);
      };
      t.undershoot_cdf = t.overshoot_cdf;
      t.passage_cdf = [beta](double x) {
        return passage_local_cdf(TailCase::RegularVariation, beta, x);
      };
      t.overshoot_id = "pareto-overshoot(alpha=beta-1)";
      t.undershoot_id = "pareto-undershoot(alpha=beta-1)";
      t.passage_id = "scaled-passage(beta)";
    } else {
      auto expcdf = [](double x) { return x <= 0 ? 0.0 : -std::expm1(-x); };
      t.overshoot_cdf = expcdf;
      t.undershoot_cdf = expcdf;
      t.passage_cdf = expcdf;
      t.overshoot_id = t.undershoot_id = t.passage_id = "unit-exponential";
    }
    return t;
  }

  const double gamma = tag.gamma;
  const double beta = tag.beta;
  auto law = std::make_shared<StableDensity>(model.negative.gamma_bar);
  const TailCase c = tag.tail_case;
  if (c == TailCase::RegularVariation) {
    t.overshoot_cdf = [beta, gamma](double x) {
      return overshoot_cdf(TailCase::RegularVariation, beta + gamma - 1.0, x);
    };
    t.overshoot_id = "pareto-overshoot(alpha=beta+gamma-1)";
  } else {
    t.overshoot_cdf = [](double x) { return x <= 0 ? 0.0 : -std::expm1(-x); };
    t.overshoot_id = "unit-exponential";
  }
  t.undershoot_cdf = marginal_v_cdf(c, beta, gamma);
  t.undershoot_id = "undershoot-occupation-marginal";
  {
    auto w = marginal_w_cdf(c, beta, *law);
    t.passage_cdf = [w, law](double x) { return w(x); };
  }
  t.passage_id = "passage-stable-mixture";
  t.local_joint_density = [law, c, beta](double z, double tt) {
    return laws::undershoot_factor(c, beta, law->gamma(), z) *
           law->density(tt, z);
  };
  t.has_local = true;
  return t;
}

ConvergenceReport convergence_trend(std::span<const LevelRow> rows) {
  ConvergenceReport rep;
  rep.rows.assign(rows.begin(), rows.end());
  if (rows.size() < 2) {
    rep.single_level = true;
    rep.trend_ok = false;
    return rep;
  }
  auto by_level = rep.rows;
  std::sort(by_level.begin(), by_level.end(),
            [](const LevelRow& a, const LevelRow& b) { return a.u < b.u; });
  const LevelRow& lo = by_level.front();
  const LevelRow& hi = by_level.back();
  rep.trend_ok = hi.ks_overshoot < lo.ks_overshoot &&
                 hi.ks_undershoot < lo.ks_undershoot &&
                 hi.ks_passage < lo.ks_passage;
  return rep;
}

}  // namespace levypass
