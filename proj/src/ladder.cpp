#include "levypass/ladder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "levypass/rng.hpp"

namespace levypass {

namespace {

constexpr std::uint64_t kSaltWalk = 2;
constexpr std::uint64_t kSaltKilled = 3;

double poisson1_cdf(std::uint64_t k) {
  // P(Poisson(1) <= k); saturates quickly.
  static const std::vector<double> table = [] {
    std::vector<double> t;
    double term = std::exp(-1.0), cum = term;
    t.push_back(cum);
    for (int j = 1; j <= 40; ++j) {
      term /= j;
      cum += term;
      t.push_back(cum);
    }
    return t;
  }();
  return k < table.size() ? table[k] : 1.0;
}

struct MeanSe {
  double mean = 0.0, se = 0.0;
};

MeanSe mean_se(double sum, double sumsq, double n) {
  MeanSe out;
  out.mean = sum / n;
  const double var = std::max(0.0, (sumsq - sum * sum / n) / (n - 1.0));
  out.se = std::sqrt(var / n);
  return out;
}

double binom_se(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

// Empirical survivor count(v > y) / n over a sorted sample.
double survivor(const std::vector<double>& sorted, double y, double n) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), y);
  return static_cast<double>(sorted.end() - it) / n;
}

}  // namespace

WalkSpec::WalkSpec(double p, JumpFamily positive, JumpFamily negative)
    : p_pos(p), pos(positive), neg(negative) {
  if (!(p_pos >= 0.0 && p_pos < 1.0))
    throw std::invalid_argument("WalkSpec: p_pos must lie in [0,1)");
  if (p_pos > 0.0 && !(mean() < 0.0))
    throw std::invalid_argument("WalkSpec: step mean must be negative");
}

double WalkSpec::mean() const {
  const double up = p_pos > 0.0 ? p_pos * pos.mean() : 0.0;
  const double down = (1.0 - p_pos) * neg.mean();
  if (std::isinf(up) && std::isinf(down))
    throw std::invalid_argument("WalkSpec: both step means infinite");
  return up - down;
}

double WalkSpec::pos_tail(double x) const {
  return p_pos > 0.0 ? p_pos * pos.survival(x) : 0.0;
}

double WalkSpec::neg_tail(double x) const {
  return (1.0 - p_pos) * neg.survival(x);
}

double WalkSpec::neg_integral_1_to(double x) const {
  return (1.0 - p_pos) * neg.integral_1_to(x);
}

std::vector<double> GridSpec::edges() const {
  if (!(lo > 0.0 && hi > lo && cells >= 1))
    throw std::invalid_argument("GridSpec: bad grid");
  std::vector<double> e(cells + 1);
  const double ratio = std::log(hi / lo) / cells;
  for (int i = 0; i <= cells; ++i) e[i] = lo * std::exp(ratio * i);
  return e;
}

LadderEstimate estimate_ladder(const WalkSpec& walk, std::uint64_t n_paths,
                               std::uint64_t horizon, const GridSpec& grid,
                               std::uint64_t seed, int workers,
                               std::span<const double> check_u,
                               double stop_depth) {
  if (n_paths == 0) throw std::invalid_argument("estimate_ladder: no paths");
  if (!(stop_depth > 0)) throw std::invalid_argument("estimate_ladder: depth");
  const auto edges = grid.edges();
  const std::size_t ne = edges.size();
  const std::size_t nu = check_u.size();

  struct Block {
    std::uint64_t n = 0, n_asc = 0, n_late = 0, n_desc = 0;
    std::vector<double> gsum, gsq;    // cumulative weak records per edge
    std::vector<double> rsum, rsq;    // renewal tail sums per check u
    double psum = 0.0, psq = 0.0;     // Poisson-thinned survival
    std::vector<double> first_asc, first_desc;
  };

  constexpr std::uint64_t kBlock = 8192;
  const std::uint64_t n_blocks = (n_paths + kBlock - 1) / kBlock;
  std::vector<Block> blocks(n_blocks);
  std::atomic<std::uint64_t> next{0};

  auto run_block = [&](std::uint64_t b) {
    Block& blk = blocks[b];
    blk.gsum.assign(ne, 0.0);
    blk.gsq.assign(ne, 0.0);
    blk.rsum.assign(nu, 0.0);
    blk.rsq.assign(nu, 0.0);
    const std::uint64_t lo = b * kBlock;
    const std::uint64_t hi = std::min(lo + kBlock, n_paths);
    std::vector<std::uint32_t> cell_count(ne, 0);
    for (std::uint64_t path = lo; path < hi; ++path) {
      RngStream rng(seed, path, kSaltWalk);
      std::fill(cell_count.begin(), cell_count.end(), 0);
      double pos = 0.0, run_min = 0.0, run_max = 0.0;
      bool have_asc = false, have_desc = false;
      double first_asc = 0.0, first_desc = 0.0;
      std::uint64_t asc_count = 0, last_max_step = 0;
      std::vector<double> rlocal(nu);
      for (std::size_t i = 0; i < nu; ++i)
        rlocal[i] = walk.pos_tail(check_u[i]);  // n = 0 renewal point
      for (std::uint64_t k = 1; k <= horizon; ++k) {
        pos += walk.step(rng);
        if (pos > run_max) {
          run_max = pos;
          ++asc_count;
          last_max_step = k;
          if (!have_asc) {
            have_asc = true;
            first_asc = pos;
          }
        }
        if (pos <= run_min) {
          run_min = pos;
          const double m = -pos;
          if (!have_desc) {
            have_desc = true;
            first_desc = m;
          }
          // bucket the renewal point
          const auto it = std::lower_bound(edges.begin(), edges.end(), m);
          const std::size_t idx =
              static_cast<std::size_t>(it - edges.begin());
          if (idx < ne) ++cell_count[idx];
          for (std::size_t i = 0; i < nu; ++i)
            rlocal[i] += walk.pos_tail(m + check_u[i]);
        }
        if (pos < -stop_depth) break;
      }
      ++blk.n;
      if (have_asc) {
        ++blk.n_asc;
        blk.first_asc.push_back(first_asc);
      }
      if (have_desc) {
        ++blk.n_desc;
        blk.first_desc.push_back(first_desc);
      }
      if (last_max_step > (horizon * 9) / 10) ++blk.n_late;
      const double ph1 = poisson1_cdf(asc_count);
      blk.psum += ph1;
      blk.psq += ph1 * ph1;
      // cumulative records <= edge_j: cell_count[idx] counts m in
      // (edge_{idx-1}, edge_idx]; prefix over idx <= j.
      double prefix = 0.0;
      for (std::size_t j = 0; j < ne; ++j) {
        prefix += cell_count[j];
        blk.gsum[j] += prefix;
        blk.gsq[j] += prefix * prefix;
      }
      for (std::size_t i = 0; i < nu; ++i) {
        blk.rsum[i] += rlocal[i];
        blk.rsq[i] += rlocal[i] * rlocal[i];
      }
    }
  };

  auto worker = [&]() {
    while (true) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      run_block(b);
    }
  };
  const int nw = std::max(1, workers);
  std::vector<std::thread> pool;
  for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  // Deterministic block-order reduction.
  LadderEstimate est;
  est.grid_edges = edges;
  est.n_paths = n_paths;
  est.horizon = horizon;
  est.check_u.assign(check_u.begin(), check_u.end());
  std::vector<double> gsum(ne, 0.0), gsq(ne, 0.0), rsum(nu, 0.0), rsq(nu, 0.0);
  double psum = 0.0, psq = 0.0;
  std::uint64_t n_asc = 0, n_late = 0;
  for (const auto& blk : blocks) {
    n_asc += blk.n_asc;
    n_late += blk.n_late;
    psum += blk.psum;
    psq += blk.psq;
    for (std::size_t j = 0; j < ne; ++j) {
      gsum[j] += blk.gsum[j];
      gsq[j] += blk.gsq[j];
    }
    for (std::size_t i = 0; i < nu; ++i) {
      rsum[i] += blk.rsum[i];
      rsq[i] += blk.rsq[i];
    }
    est.first_ascent.insert(est.first_ascent.end(), blk.first_asc.begin(),
                            blk.first_asc.end());
    est.first_descent.insert(est.first_descent.end(), blk.first_desc.begin(),
                             blk.first_desc.end());
  }
  const double n = static_cast<double>(n_paths);
  est.p_hat = static_cast<double>(n_asc) / n;
  est.q_hat = 1.0 - est.p_hat;
  est.q_se = binom_se(est.p_hat, n);
  est.no_ascent = n_asc == 0;
  est.late_max_fraction = static_cast<double>(n_late) / n;

  std::vector<double> asc_sorted = est.first_ascent;
  std::sort(asc_sorted.begin(), asc_sorted.end());
  est.pi_h_tail.resize(ne);
  est.pi_h_tail_se.resize(ne);
  for (std::size_t j = 0; j < ne; ++j) {
    const double tail = survivor(asc_sorted, edges[j], n);
    est.pi_h_tail[j] = tail;
    est.pi_h_tail_se[j] = binom_se(tail, n);
  }

  est.g_star.resize(ne);
  est.g_star_se.resize(ne);
  for (std::size_t j = 0; j < ne; ++j) {
    const auto ms = mean_se(gsum[j], gsq[j], n);
    est.g_star[j] = 1.0 + ms.mean;  // renewal atom at the origin
    est.g_star_se[j] = ms.se;
  }

  est.a_hstar.resize(ne);
  est.a_hstar_se.resize(ne);
  {
    std::vector<double> desc_sorted = est.first_descent;
    std::sort(desc_sorted.begin(), desc_sorted.end());
    std::vector<double> prefix(desc_sorted.size() + 1, 0.0);
    for (std::size_t i = 0; i < desc_sorted.size(); ++i)
      prefix[i + 1] = prefix[i] + desc_sorted[i];
    for (std::size_t j = 0; j < ne; ++j) {
      const double x = edges[j];
      const auto it =
          std::upper_bound(desc_sorted.begin(), desc_sorted.end(), x);
      const std::size_t k = static_cast<std::size_t>(it - desc_sorted.begin());
      const double sum = prefix[k] + x * (desc_sorted.size() - k);
      double sumsq = 0.0;
      // SE via direct second moment of zeta ^ x.
      for (std::size_t i = 0; i < k; ++i) sumsq += desc_sorted[i] * desc_sorted[i];
      sumsq += x * x * (desc_sorted.size() - k);
      const auto ms = mean_se(sum, sumsq, n);
      est.a_hstar[j] = ms.mean;
      est.a_hstar_se[j] = ms.se;
    }
    double s = 0.0, s2 = 0.0;
    for (double v : est.first_descent) {
      s += v;
      s2 += v * v;
    }
    const auto ms = mean_se(s, s2, n);
    est.mean_weak_ladder = ms.mean;
    est.mean_weak_ladder_se = ms.se;
  }

  {
    const auto ms = mean_se(psum, psq, n);
    est.p_h1_finite = ms.mean;
    est.p_h1_finite_se = ms.se;
  }

  est.renewal_tail_sum.resize(nu);
  est.renewal_tail_sum_se.resize(nu);
  for (std::size_t i = 0; i < nu; ++i) {
    const auto ms = mean_se(rsum[i], rsq[i], n);
    est.renewal_tail_sum[i] = ms.mean;
    est.renewal_tail_sum_se[i] = ms.se;
  }
  return est;
}

std::vector<IdentityRow> check_vigon_inverse(const LadderEstimate& lhs_est,
                                             const LadderEstimate& rhs_est,
                                             const WalkSpec&) {
  std::vector<double> asc_sorted = lhs_est.first_ascent;
  std::sort(asc_sorted.begin(), asc_sorted.end());
  const double n_lhs = static_cast<double>(lhs_est.n_paths);
  std::vector<IdentityRow> rows;
  for (std::size_t i = 0; i < rhs_est.check_u.size(); ++i) {
    IdentityRow r;
    r.u = rhs_est.check_u[i];
    r.lhs = survivor(asc_sorted, r.u, n_lhs);
    r.lhs_se = binom_se(r.lhs, n_lhs);
    r.rhs = rhs_est.renewal_tail_sum[i];
    r.rhs_se = rhs_est.renewal_tail_sum_se[i];
    const double se = std::sqrt(r.lhs_se * r.lhs_se + r.rhs_se * r.rhs_se);
    r.ratio = r.rhs != 0.0 ? r.lhs / r.rhs : 0.0;
    r.rel_gap = r.lhs != 0.0 ? std::abs(r.lhs - r.rhs) / r.lhs : 0.0;
    r.combined_rel_ci = r.lhs != 0.0 ? 1.96 * se / r.lhs : 0.0;
    r.z_score = se > 0.0 ? (r.rhs - r.lhs) / se : 0.0;
    r.pass = std::abs(r.lhs - r.rhs) <= 1.96 * se;
    rows.push_back(r);
  }
  return rows;
}

std::vector<IdentityRow> check_vigon_direct_pos(const LadderEstimate& asc_est,
                                                const LadderEstimate& desc_est,
                                                const WalkSpec& walk,
                                                std::span<const double> us) {
  std::vector<double> desc_sorted = desc_est.first_descent;
  std::sort(desc_sorted.begin(), desc_sorted.end());
  const double n_asc = static_cast<double>(asc_est.n_paths);
  const double n_desc = static_cast<double>(desc_est.n_paths);
  const double dkw_desc = 1.36 / std::sqrt(n_desc);
  std::vector<IdentityRow> rows;
  for (double u : us) {
    IdentityRow r;
    r.u = u;
    r.lhs = walk.pos_tail(u);
    r.lhs_se = 0.0;
    double sum = 0.0, sumsq = 0.0, p_above = 0.0;
    for (double h : asc_est.first_ascent) {
      if (h <= u) continue;
      const double v = survivor(desc_sorted, h - u, n_desc);
      sum += v;
      sumsq += v * v;
      p_above += 1.0;
    }
    const auto ms = mean_se(sum, sumsq, n_asc);
    r.rhs = ms.mean;
    const double dkw_term = dkw_desc * (p_above / n_asc);
    r.rhs_se = std::sqrt(ms.se * ms.se + dkw_term * dkw_term);
    const double se = r.rhs_se;
    r.ratio = r.rhs != 0.0 ? r.lhs / r.rhs : 0.0;
    r.rel_gap = r.lhs != 0.0 ? std::abs(r.lhs - r.rhs) / r.lhs : 0.0;
    r.combined_rel_ci = r.lhs != 0.0 ? 1.96 * se / r.lhs : 0.0;
    r.z_score = se > 0.0 ? (r.rhs - r.lhs) / se : 0.0;
    r.pass = std::abs(r.lhs - r.rhs) <= 1.96 * se;
    rows.push_back(r);
  }
  return rows;
}

std::vector<IdentityRow> check_vigon_direct_neg(const LadderEstimate& asc_est,
                                                const LadderEstimate& desc_est,
                                                const WalkSpec& walk,
                                                std::span<const double> us) {
  std::vector<double> asc_sorted = asc_est.first_ascent;
  std::sort(asc_sorted.begin(), asc_sorted.end());
  std::vector<double> desc_sorted = desc_est.first_descent;
  std::sort(desc_sorted.begin(), desc_sorted.end());
  const double n_asc = static_cast<double>(asc_est.n_paths);
  const double n_desc = static_cast<double>(desc_est.n_paths);
  const double dkw_asc = 1.36 / std::sqrt(n_asc);
  std::vector<IdentityRow> rows;
  for (double u : us) {
    IdentityRow r;
    r.u = u;
    r.lhs = walk.neg_tail(u);
    r.lhs_se = 0.0;
    // integral term against the weak descending jump law
    double sum = 0.0, sumsq = 0.0, p_above = 0.0;
    for (double zeta : desc_est.first_descent) {
      if (zeta <= u) continue;
      const double v = survivor(asc_sorted, zeta - u, n_asc);
      sum += v;
      sumsq += v * v;
      p_above += 1.0;
    }
    const auto ms = mean_se(sum, sumsq, n_desc);
    // killing term q * Pi_bar_{H*}(u)
    const double tail_hstar = survivor(desc_sorted, u, n_desc);
    const double kill_term = asc_est.q_hat * tail_hstar;
    r.rhs = ms.mean + kill_term;
    const double dkw_term = dkw_asc * (p_above / n_desc);
    const double kill_se =
        std::sqrt(std::pow(asc_est.q_se * tail_hstar, 2) +
                  std::pow(asc_est.q_hat * binom_se(tail_hstar, n_desc), 2));
    r.rhs_se = std::sqrt(ms.se * ms.se + dkw_term * dkw_term +
                         kill_se * kill_se);
    const double se = r.rhs_se;
    r.ratio = r.rhs != 0.0 ? r.lhs / r.rhs : 0.0;
    r.rel_gap = r.lhs != 0.0 ? std::abs(r.lhs - r.rhs) / r.lhs : 0.0;
    r.combined_rel_ci = r.lhs != 0.0 ? 1.96 * se / r.lhs : 0.0;
    r.z_score = se > 0.0 ? (r.rhs - r.lhs) / se : 0.0;
    r.pass = std::abs(r.lhs - r.rhs) <= 1.96 * se;
    rows.push_back(r);
  }
  return rows;
}

bool identity_table_pass(std::span<const IdentityRow> rows, double alpha) {
  if (rows.empty()) return false;
  // two-sided normal quantile at alpha / (2 m), via inverse erfc
  const double a = alpha / static_cast<double>(rows.size());
  // bisection on erfc(z / sqrt 2) = a
  double lo = 0.0, hi = 10.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::erfc(mid / std::sqrt(2.0)) > a ? lo : hi) = mid;
  }
  const double zcrit = 0.5 * (lo + hi);
  for (const auto& r : rows)
    if (std::abs(r.z_score) > zcrit) return false;
  return true;
}

std::vector<RatioRow> check_truncated_mean_ratio(const LadderEstimate& est,
                                                 const WalkSpec& walk,
                                                 std::span<const double> xs) {
  std::vector<double> desc_sorted = est.first_descent;
  std::sort(desc_sorted.begin(), desc_sorted.end());
  std::vector<double> prefix(desc_sorted.size() + 1, 0.0),
      prefix2(desc_sorted.size() + 1, 0.0);
  for (std::size_t i = 0; i < desc_sorted.size(); ++i) {
    prefix[i + 1] = prefix[i] + desc_sorted[i];
    prefix2[i + 1] = prefix2[i] + desc_sorted[i] * desc_sorted[i];
  }
  const double n = static_cast<double>(est.n_paths);
  std::vector<RatioRow> rows;
  for (double x : xs) {
    RatioRow r;
    r.x = x;
    if (!(x > 1.0)) {
      r.indeterminate = true;
      rows.push_back(r);
      continue;
    }
    r.numerator = walk.neg_integral_1_to(x);
    const auto it = std::upper_bound(desc_sorted.begin(), desc_sorted.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - desc_sorted.begin());
    const double sum = prefix[k] + x * (desc_sorted.size() - k);
    const double sumsq = prefix2[k] + x * x * (desc_sorted.size() - k);
    const auto ms = mean_se(sum, sumsq, n);
    r.denominator = ms.mean;
    r.denominator_se = ms.se;
    r.ratio = r.denominator > 0.0 ? r.numerator / r.denominator : 0.0;
    rows.push_back(r);
  }
  return rows;
}

KilledOvershootResult overshoot_killed_subordinator(const JumpFamily& family,
                                                    double rate, double kill_q,
                                                    double u, std::size_t n,
                                                    std::uint64_t seed,
                                                    int workers) {
  if (!(rate > 0) || !(kill_q > 0) || !(u > 0) || n == 0)
    throw std::invalid_argument("overshoot_killed_subordinator: bad arguments");
  const double kill_prob = kill_q / (kill_q + rate);

  struct Hit {
    std::uint64_t rep;
    double o;
  };
  constexpr std::uint64_t kBlock = 8192;
  const std::uint64_t ceiling = 4'000'000'000ULL;
  const std::uint64_t max_blocks = ceiling / kBlock;

  std::atomic<std::uint64_t> next_block{0};
  std::atomic<bool> done{false};
  std::mutex mu;
  std::vector<Hit> hits;
  std::vector<std::int64_t> block_hits;
  std::uint64_t frontier = 0, prefix_hits = 0, killed_total = 0;

  auto worker = [&]() {
    while (!done.load(std::memory_order_relaxed)) {
      const std::uint64_t b = next_block.fetch_add(1);
      if (b >= max_blocks) return;
      std::vector<Hit> local;
      std::uint64_t local_killed = 0;
      for (std::uint64_t rep = b * kBlock; rep < (b + 1) * kBlock; ++rep) {
        RngStream rng(seed, rep, kSaltKilled);
        double y = 0.0;
        while (true) {
          if (rng.uniform() < kill_prob) {
            ++local_killed;
            break;
          }
          y += family.sample(rng);
          if (y > u) {
            local.push_back({rep, y - u});
            break;
          }
        }
      }
      std::lock_guard<std::mutex> lock(mu);
      hits.insert(hits.end(), local.begin(), local.end());
      killed_total += local_killed;
      if (block_hits.size() <= b) block_hits.resize(b + 1, -1);
      block_hits[b] = static_cast<std::int64_t>(local.size());
      while (frontier < block_hits.size() && block_hits[frontier] >= 0) {
        prefix_hits += static_cast<std::uint64_t>(block_hits[frontier]);
        ++frontier;
      }
      if (prefix_hits >= n) done.store(true, std::memory_order_relaxed);
    }
  };
  const int nw = std::max(1, workers);
  std::vector<std::thread> pool;
  for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::sort(hits.begin(), hits.end(),
            [](const Hit& a, const Hit& b) { return a.rep < b.rep; });
  const std::uint64_t prefix_end = frontier * kBlock;
  (void)killed_total;
  KilledOvershootResult out;
  for (const auto& h : hits) {
    if (h.rep >= prefix_end || out.overshoots.size() == n) break;
    out.overshoots.push_back(h.o);
    out.attempts = h.rep + 1;
  }
  // every consumed attempt either passed or was killed first
  out.killed = out.attempts - out.overshoots.size();
  out.a_u = family.kind == JumpKind::Pareto
                ? u
                : family.tail_integral(u) / family.survival(u);
  return out;
}

}  // namespace levypass
