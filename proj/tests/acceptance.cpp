// End-to-end acceptance suite. Each numbered criterion prints one PASS/FAIL
// line; the process exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "levypass/ladder.hpp"
#include "levypass/limit_laws.hpp"
#include "levypass/norming.hpp"
#include "levypass/quadrature.hpp"
#include "levypass/simulate.hpp"
#include "levypass/stable_law.hpp"
#include "levypass/verify.hpp"

using namespace levypass;
using laws::TabulatedCdf;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kSeed = 20260810;
constexpr int kWorkers = 4;

int failures = 0;

void report(const std::string& id, bool pass, const std::string& detail,
            double seconds) {
  if (!pass) ++failures;
  std::printf("[%s] %-12s %s (%.1fs)\n", pass ? "PASS" : "FAIL", id.c_str(),
              detail.c_str(), seconds);
  std::fflush(stdout);
}

struct Timer {
  Clock::time_point t0 = Clock::now();
  double s() const {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  }
};

std::string fmt(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return std::string(buf);
}

double levy1(double x) {
  return x > 0 ? std::exp(-0.25 / x) /
                     (2.0 * std::sqrt(std::numbers::pi) * std::pow(x, 1.5))
               : 0.0;
}

// integrates f over (0, inf) after removing a z^-gamma factor at the origin
double integrate_singular_to_inf(const std::function<double(double)>& f,
                                 double gamma) {
  const double p = 1.0 / (1.0 - gamma);
  return integrate_to_inf(
      [&](double w) {
        const double z = std::pow(w, p);
        return f(z) * p * std::pow(w, p - 1.0);
      },
      0.0);
}

// ---------------------------------------------------------------- 1
void criterion1() {
  Timer tm;
  StableDensity law(0.5);
  double worst_series = 0.0;
  for (int i = 0; i <= 500; ++i) {
    const double x = 0.05 * std::pow(1000.0, i / 500.0);
    const double got = law.series_density1(x);
    const double want = levy1(x);
    worst_series = std::max(worst_series, std::abs(got - want) / want);
  }
  const double mass =
      integrate([&](double x) { return law.density1(x); }, 0.0, 50.0) +
      law.tail_integral1(50.0);
  double worst_scale = 0.0;
  for (double t : {0.5, 2.0, 16.0}) {
    for (double z : {0.1, 1.0, 10.0}) {
      const double s = std::pow(t, 2.0);
      const double lhs = s * law.density(t, z);
      const double rhs = law.density1(z / s);
      if (rhs > 0.0)
        worst_scale = std::max(worst_scale, std::abs(lhs - rhs) / rhs);
    }
  }
  const double ck = integrate(
      [&](double y) {
        return law.density(0.4, y) * law.density(0.6, 1.0 - y);
      },
      0.0, 1.0);
  const double ck_err = std::abs(ck - law.density(1.0, 1.0)) /
                        law.density(1.0, 1.0);
  const bool pass = worst_series <= 1e-10 && std::abs(mass - 1.0) <= 1e-8 &&
                    worst_scale <= 1e-12 && ck_err <= 1e-6 && tm.s() < 10.0;
  report("criterion 1", pass,
         fmt("stable density: series err %.1e, mass err %.1e, scaling %.1e, "
             "chapman-kolmogorov %.1e",
             worst_series, std::abs(mass - 1.0), worst_scale, ck_err),
         tm.s());
}

// ---------------------------------------------------------------- 2
void criterion2() {
  Timer tm;
  using namespace levypass::laws;
  const TailCase rv = TailCase::RegularVariation;
  const TailCase gm = TailCase::Gumbel;
  StableDensity law(0.5);
  const double gamma = 0.5;
  const double beta = 2.5;

  QuadratureOptions inner;
  inner.rel_tol = 1e-9;
  double worst_norm = 0.0;
  auto track = [&](const char*, double mass) {
    worst_norm = std::max(worst_norm, std::abs(mass - 1.0));
  };

  track("local-i", integrate_to_inf(
                       [&](double t) {
                         return passage_local_density(rv, beta, t);
                       },
                       0.0, inner));
  track("local-ii", integrate_to_inf(
                        [&](double t) {
                          return passage_local_density(gm, beta, t);
                        },
                        0.0, inner));
  for (TailCase c : {rv, gm}) {
    track("Y0/Y1", integrate_to_inf(
                       [&](double z) {
                         return integrate_to_inf(
                             [&](double x) {
                               return joint_vu_density(c, beta, z, x);
                             },
                             0.0, inner);
                       },
                       0.0, inner));
  }
  for (TailCase c : {rv, gm}) {
    auto zx_mass = [&](double t) {
      return integrate_singular_to_inf(
          [&](double z) {
            return integrate_to_inf(
                [&](double x) {
                  return joint_vuw_density(c, beta, law, z, x, t);
                },
                0.0, inner);
          },
          gamma);
    };
    QuadratureOptions outer;
    outer.rel_tol = 1e-7;
    track("J11/J12", integrate(zx_mass, 0.0, 40.0, outer) +
                         integrate_to_inf(zx_mass, 40.0, outer));
  }
  for (TailCase c : {rv, gm}) {
    track("J111/J113", integrate_singular_to_inf(
                           [&](double z) {
                             return integrate_to_inf(
                                 [&](double x) {
                                   return marginal_vu_density(c, beta, gamma,
                                                              z, x);
                                 },
                                 0.0, inner);
                           },
                           gamma));
    track("J112/J114", integrate_to_inf(
                           [&](double t) {
                             return marginal_w_density(c, beta, law, t);
                           },
                           0.0, inner));
  }
  track("prop1-i", integrate_to_inf(
                       [&](double x) { return overshoot_density(rv, 1.5, x); },
                       0.0, inner));
  track("prop1-ii", integrate_to_inf(
                        [&](double x) { return overshoot_density(gm, 0.0, x); },
                        0.0, inner));

  // overshoot marginal of the gamma-zero joint equals the defective
  // subordinator law with alpha = beta - 1
  double worst_marg = 0.0;
  for (double x : {0.2, 1.0, 4.0}) {
    const double marg = integrate_to_inf(
        [&](double z) { return joint_vu_density(rv, beta, z, x); }, 0.0,
        inner);
    worst_marg = std::max(
        worst_marg, std::abs(marg - overshoot_density(rv, beta - 1.0, x)));
  }

  const auto c_rv = constants(gamma, 2.0, rv);
  const auto c_gm = constants(gamma, 2.0, gm);
  const double kerr = std::abs(c_rv.k_gamma - 4.0 / std::numbers::pi);
  const double cerr1 = std::abs(c_rv.c_gamma_beta - 1.0);
  const double cerr2 = std::abs(c_gm.c_gamma_beta - std::tgamma(1.5));

  const bool pass = worst_norm <= 1e-6 && worst_marg <= 1e-8 &&
                    kerr <= 1e-12 && cerr1 <= 1e-12 && cerr2 <= 1e-12 &&
                    tm.s() < 30.0;
  report("criterion 2", pass,
         fmt("limit-law normalisations: worst mass err %.1e, marginal "
             "chain %.1e, constants %.1e",
             worst_norm, worst_marg, std::max({kerr, cerr1, cerr2})),
         tm.s());
}

// ---------------------------------------------------------------- 3
void criterion3() {
  Timer tm;
  const double beta = 2.5;
  const ModelSpec model(JumpFamily::pareto(beta, 8.0), 1.0,
                        NegativeComponent::drift(320.0 / 3.0));
  const NormingBundle norm(model);
  SimBudget budget;
  budget.t_cap = 20.0;
  budget.depth_cap = 20.0;

  auto cdf_o = [&](double x) {
    return x <= 0 ? 0.0 : 1.0 - std::pow(1.0 + x, -(beta - 1.0));
  };
  auto cdf_tau = [&](double t) {
    return t <= 0 ? 0.0 : 1.0 - std::pow(1.0 + t, 1.0 - beta);
  };

  struct Dist {
    double o, z, tau;
  };
  std::vector<std::pair<double, Dist>> rows;
  for (double u : {20.0, 200.0}) {
    const auto res = sample_conditional(model, u, 20000, kSeed, kWorkers,
                                        budget, {}, 1000000000ULL);
    std::vector<double> o, z, tau;
    for (const auto& s : res.samples) {
      o.push_back(s.overshoot / u);
      z.push_back(s.undershoot / u);
      tau.push_back(s.passage_time / norm.passage_scale(u));
    }
    rows.push_back(
        {u, {ks_distance(o, cdf_o), ks_distance(z, cdf_o),
             ks_distance(tau, cdf_tau)}});
  }
  const Dist lo = rows[0].second, hi = rows[1].second;
  const bool trend =
      hi.o < lo.o && hi.z < lo.z && hi.tau < lo.tau;
  const bool pass =
      hi.o <= 0.05 && hi.tau <= 0.06 && hi.z <= 0.06 && trend;
  report("criterion 3", pass,
         fmt("finite-scale heavy case at u=200: KS O=%.4f Z=%.4f tau=%.4f "
             "(u=20: %.3f/%.3f/%.3f, trend %s)",
             hi.o, hi.z, hi.tau, lo.o, lo.z, lo.tau, trend ? "ok" : "broken"),
         tm.s());
}

// ---------------------------------------------------------------- 4
void criterion4() {
  Timer tm;
  const ModelSpec model(JumpFamily::weibull(0.5, 1.0), 1.0,
                        NegativeComponent::drift(60.0));
  const NormingBundle norm(model);
  // closed-form scale at the reference level
  const double a4 = norm.space_scale(1e4);
  const bool scale_ok = std::abs(a4 - 202.0) <= 1e-9 * 202.0;

  // exact conditional sampling is only affordable while exp(sqrt(u))
  // attempts fit in a compute budget; u = 100 keeps the rejection rate near
  // 1e-5 while the overshoot limit is already sharp
  const double u = 100.0;
  SimBudget budget;
  budget.t_cap = 10.0;
  budget.depth_cap = 10.0;
  const auto res = sample_conditional(model, u, 20000, kSeed, kWorkers,
                                      budget, {}, 4000000000ULL);
  const double a = norm.space_scale(u);
  std::vector<double> o;
  std::vector<std::pair<double, double>> zo;
  for (const auto& s : res.samples) {
    o.push_back(s.overshoot / a);
    zo.emplace_back(s.undershoot / a, s.overshoot / a);
  }
  const double ks =
      ks_distance(o, [](double x) { return x <= 0 ? 0.0 : -std::expm1(-x); });
  const auto cond = conditional_overshoot_check(zo, TailCase::Gumbel, 0.0, 5);

  const bool pass = scale_ok && ks <= 0.05 && cond.pass;
  report("criterion 4", pass,
         fmt("gumbel case: a(1e4)=%.6f (%s), KS O=%.4f at u=%g (n=2e4), "
             "stratified z-independence %s (max pairwise %.3f vs %.3f; the "
             "stated level 1e4 needs ~e^100 rejection attempts)",
             a4, scale_ok ? "exact" : "off", ks, u,
             cond.pass ? "pass" : "FAIL", cond.max_pairwise_ks,
             cond.pairwise_critical),
         tm.s());
}

// ---------------------------------------------------------------- 5
void criterion5() {
  Timer tm;
  const double beta = 2.5, gamma = 0.5;
  const ModelSpec model(JumpFamily::pareto(beta, 200.0), 0.01,
                        NegativeComponent::stable(0.5, 1.0));
  const NormingBundle norm(model);
  const double u = 1e4;
  SimBudget budget;
  budget.t_cap = 12.0;
  budget.depth_cap = 50.0;
  const std::vector<double> fractions{0.5};
  const auto res = sample_conditional(model, u, 50000, kSeed, kWorkers,
                                      budget, fractions, 4000000000ULL);
  const double a = norm.space_scale(u);
  const double r = norm.passage_scale(u);

  StableDensity law(0.5);
  auto vcdf = laws::marginal_v_cdf(TailCase::RegularVariation, beta, gamma);
  auto wcdf = laws::marginal_w_cdf(TailCase::RegularVariation, beta, law);

  std::vector<double> z, tau;
  std::vector<std::pair<double, double>> zt;
  struct Triple {
    double z1, z2, t;
  };
  std::vector<Triple> triples;
  for (const auto& s : res.samples) {
    z.push_back(s.undershoot / a);
    tau.push_back(s.passage_time / r);
    zt.emplace_back(s.undershoot / a, s.passage_time / r);
    triples.push_back(
        {s.snapshots.at(0).dual_position / a, s.undershoot / a,
         s.passage_time / r});
  }
  const double ks_z = ks_distance(z, vcdf);
  const double ks_w = ks_distance(tau, wcdf);

  auto local_target = [&](double zz, double tt) {
    return laws::undershoot_factor(TailCase::RegularVariation, beta, gamma,
                                   zz) *
           law.density(tt, zz);
  };
  const auto local =
      local_density_check(zt, local_target, 0.1, 3.0, 0.1, 3.0, 10, 10);

  // two-point path law: product of stable increments times the undershoot
  // factor, on a 6^3 grid over the uniformity window
  const int nb = 6;
  const double wlo = 0.1, whi = 3.0, dw = (whi - wlo) / nb;
  std::vector<std::uint64_t> counts(nb * nb * nb, 0);
  for (const auto& tr : triples) {
    if (tr.z1 < wlo || tr.z1 >= whi || tr.z2 < wlo || tr.z2 >= whi ||
        tr.t < wlo || tr.t >= whi)
      continue;
    const int i = std::min(nb - 1, static_cast<int>((tr.z1 - wlo) / dw));
    const int j = std::min(nb - 1, static_cast<int>((tr.z2 - wlo) / dw));
    const int k = std::min(nb - 1, static_cast<int>((tr.t - wlo) / dw));
    ++counts[(i * nb + j) * nb + k];
  }
  static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                               0.3399810435848563, 0.8611363115940526};
  static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                               0.6521451548625461, 0.3478548451374538};
  const double s_mid[] = {0.5};
  std::size_t occupied = 0, occupied_pass = 0;
  const double n_total = static_cast<double>(res.samples.size());
  for (int i = 0; i < nb; ++i) {
    for (int j = 0; j < nb; ++j) {
      for (int k = 0; k < nb; ++k) {
        double mass = 0.0;
        for (int a1 = 0; a1 < 4; ++a1)
          for (int a2 = 0; a2 < 4; ++a2)
            for (int a3 = 0; a3 < 4; ++a3) {
              const double z1 = wlo + (i + 0.5 + 0.5 * gx[a1]) * dw;
              const double z2 = wlo + (j + 0.5 + 0.5 * gx[a2]) * dw;
              const double tt = wlo + (k + 0.5 + 0.5 * gx[a3]) * dw;
              const double zz[] = {z1, z2};
              mass += gw[a1] * gw[a2] * gw[a3] *
                      laws::fdd_theta(TailCase::RegularVariation, beta, law,
                                      zz, s_mid, tt);
            }
        mass *= dw * dw * dw / 8.0;
        const double expected = n_total * mass;
        if (expected < 30.0) continue;
        ++occupied;
        const double cnt =
            static_cast<double>(counts[(i * nb + j) * nb + k]);
        if (std::abs(cnt - expected) <= 1.96 * std::sqrt(expected))
          ++occupied_pass;
      }
    }
  }
  const double fdd_frac =
      occupied > 0 ? static_cast<double>(occupied_pass) / occupied : 0.0;

  const bool pass = ks_z <= 0.06 && ks_w <= 0.08 && !local.insufficient &&
                    local.pass_fraction >= 0.90 && fdd_frac >= 0.85;
  report("criterion 5", pass,
         fmt("stable-time case at u=1e4 (n=5e4): KS Z=%.4f (tol .06), KS "
             "tau=%.4f (tol .08), local bins %.1f%% pass, two-point bins "
             "%.1f%% pass (%zu occupied)",
             ks_z, ks_w, 100.0 * local.pass_fraction, 100.0 * fdd_frac,
             occupied),
         tm.s());
}

// ---------------------------------------------------------------- 6
void criterion6() {
  Timer tm;
  const auto heavy = overshoot_killed_subordinator(
      JumpFamily::pareto(1.5, 1.0), 0.2, 0.2, 100.0, 20000, kSeed, kWorkers);
  std::vector<double> sc;
  for (double o : heavy.overshoots) sc.push_back(o / heavy.a_u);
  const double ks1 = ks_distance(sc, [](double x) {
    return x <= 0 ? 0.0 : 1.0 - std::pow(1.0 + x, -1.5);
  });

  const auto gumbel = overshoot_killed_subordinator(
      JumpFamily::weibull(0.5, 100.0), 0.5, 0.2, 1e4, 20000, kSeed + 1,
      kWorkers);
  std::vector<double> sc2;
  for (double o : gumbel.overshoots) sc2.push_back(o / gumbel.a_u);
  const double ks2 = ks_distance(
      sc2, [](double x) { return x <= 0 ? 0.0 : -std::expm1(-x); });

  const bool pass = ks1 <= 0.05 && ks2 <= 0.05 && heavy.a_u == 100.0;
  report("criterion 6", pass,
         fmt("killed subordinator overshoots: heavy KS=%.4f, gumbel KS=%.4f "
             "(a(u)=%.0f)",
             ks1, ks2, gumbel.a_u),
         tm.s());
}

// ---------------------------------------------------------------- 7
void criterion7() {
  Timer tm;
  const WalkSpec walk(0.3, JumpFamily::pareto(3.0, 2.0),
                      JumpFamily::weibull(1.0, 8.0 / 7.0));
  const GridSpec grid{0.05, 40.0, 96};
  const std::vector<double> check_u{1.0, 2.0, 3.0, 4.0, 5.0};
  const auto est_a = estimate_ladder(walk, 1000000, 100000, grid, kSeed,
                                     kWorkers, check_u, 1000.0);
  const auto est_b = estimate_ladder(walk, 1000000, 100000, grid, kSeed + 1,
                                     kWorkers, check_u, 1000.0);

  const auto inv = check_vigon_inverse(est_a, est_b, walk);
  const auto dpos = check_vigon_direct_pos(est_a, est_b, walk, check_u);
  const auto dneg = check_vigon_direct_neg(est_a, est_b, walk, check_u);
  const bool vig_ok = identity_table_pass(inv) && identity_table_pass(dpos) &&
                      identity_table_pass(dneg);

  const double surv = std::exp(-est_a.q_hat);
  const double surv_se = std::sqrt(std::pow(est_a.q_se * surv, 2) +
                                   std::pow(est_a.p_h1_finite_se, 2));
  const bool kill_ok = std::abs(surv - est_a.p_h1_finite) <= 1.96 * surv_se;

  const double rhs = est_a.q_hat * est_a.mean_weak_ladder;
  const double mean_se = std::sqrt(
      std::pow(est_a.q_se * est_a.mean_weak_ladder, 2) +
      std::pow(est_a.q_hat * est_a.mean_weak_ladder_se, 2));
  const bool mean_ok = std::abs(0.5 - rhs) <= 1.96 * mean_se;

  // infinite-mean companion walk for the truncated-mean ratio
  const WalkSpec heavy(0.3, JumpFamily::pareto(3.0, 2.0),
                       JumpFamily::pareto(0.8, 1.0));
  const GridSpec grid2{0.05, 2000.0, 96};
  const auto est_h = estimate_ladder(heavy, 1000000, 100000, grid2, kSeed + 2,
                                     kWorkers, check_u, 2100.0);
  const std::vector<double> xs{2000.0};
  const auto ratio = check_truncated_mean_ratio(est_h, heavy, xs);
  const bool ratio_ok =
      std::abs(ratio[0].ratio - est_h.q_hat) / est_h.q_hat <= 0.10;

  const bool pass = vig_ok && kill_ok && mean_ok && ratio_ok;
  double worst_gap = 0.0;
  for (const auto* rows : {&inv, &dpos, &dneg})
    for (const auto& row : *rows)
      worst_gap = std::max(worst_gap, std::abs(row.z_score));
  report("criterion 7", pass,
         fmt("ladder identities: friendly eqs %s (worst |z|=%.2f), killing "
             "survival %s, mean identity %s, truncated-mean ratio "
             "%.4f vs q=%.4f (%s)",
             vig_ok ? "ok" : "FAIL", worst_gap, kill_ok ? "ok" : "FAIL",
             mean_ok ? "ok" : "FAIL", ratio[0].ratio, est_h.q_hat,
             ratio_ok ? "ok" : "FAIL"),
         tm.s());
}

// ---------------------------------------------------------------- 8
void criterion8() {
  Timer tm;
  const ModelSpec model(JumpFamily::pareto(2.5, 8.0), 1.0,
                        NegativeComponent::drift(320.0 / 3.0));
  SimBudget budget;
  budget.t_cap = 20.0;
  budget.depth_cap = 20.0;
  const std::vector<double> fr{0.25, 0.5, 0.75};
  const auto r1 =
      sample_conditional(model, 20.0, 500, kSeed, 4, budget, fr, 100000000ULL);
  const auto r2 =
      sample_conditional(model, 20.0, 500, kSeed, 4, budget, fr, 100000000ULL);
  const auto r3 =
      sample_conditional(model, 20.0, 500, kSeed, 1, budget, fr, 100000000ULL);
  const bool rerun_ok = samples_to_csv(r1, fr) == samples_to_csv(r2, fr);
  const bool workers_ok = samples_to_csv(r1, fr) == samples_to_csv(r3, fr);

  const ModelSpec oracle_model(JumpFamily::pareto(2.5, 1.0), 1.0,
                               NegativeComponent::drift(2.0));
  const NormingBundle norm(oracle_model);
  const double u = 0.5;
  const LevelScales sc{norm.space_scale(u), norm.passage_scale(u)};
  int agree = 0;
  const int n = 1000;
  for (std::uint64_t rep = 0; rep < static_cast<std::uint64_t>(n); ++rep) {
    RngStream rng(kSeed + 3, rep);
    const auto out = simulate_first_passage(oracle_model, u, rng, SimBudget{},
                                            sc);
    const double horizon = out.passed ? out.sample.passage_time + 1e-9
                                      : out.diagnostics.elapsed;
    if (grid_oracle_passage(oracle_model, u, kSeed + 3, rep, horizon, 1e-4) ==
        out.passed)
      ++agree;
  }
  const bool pass = rerun_ok && workers_ok && agree == n;
  report("criterion 8", pass,
         fmt("determinism: rerun %s, worker-count %s, grid-oracle agreement "
             "%d/%d",
             rerun_ok ? "identical" : "DIFFERS",
             workers_ok ? "identical" : "DIFFERS", agree, n),
         tm.s());
}

}  // namespace

int main() {
  Timer total;
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  std::printf("%d of 8 criteria passed (%.0fs total)\n", 8 - failures,
              total.s());
  return failures == 0 ? 0 : 1;
}
