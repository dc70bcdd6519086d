#include "levypass/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <memory>
#include <mutex>
#include <thread>

#include "levypass/passage_engine.hpp"

namespace levypass {

namespace {

// Position at an interior time, given the recorded event skeleton. For the
// stable component the within-gap increment is drawn from the increment's
// conditional law given the gap total, consuming `bridge_rng`.
std::vector<Snapshot> reconstruct_snapshots(
    const ModelSpec& m, const std::vector<PathEvent>& events, double tau,
    double undershoot, std::span<const double> fractions, RngStream& bridge_rng,
    const StableDensity* stable) {
  std::vector<Snapshot> out;
  out.reserve(fractions.size());

  std::vector<double> sorted(fractions.begin(), fractions.end());
  std::sort(sorted.begin(), sorted.end());

  std::size_t ev = 0;  // first event with t >= ts
  // Per-gap chain state for sequential bridge draws.
  double chain_t = -1.0, chain_pos = 0.0, chain_rem = 0.0;

  for (double f : sorted) {
    if (f >= 1.0) {
      out.push_back({f, undershoot});
      continue;
    }
    const double ts = f * tau;
    while (ev < events.size() && events[ev].t <= ts) ++ev;
    const double t_left = ev == 0 ? 0.0 : events[ev - 1].t;
    const double pos_left = ev == 0 ? 0.0 : events[ev - 1].pos_after;
    double value;
    switch (m.negative.kind) {
      case NegKind::Drift:
        value = pos_left - m.negative.drift_rate * (ts - t_left);
        break;
      case NegKind::CompoundPoisson:
        value = pos_left;
        break;
      case NegKind::StableSubordinator: {
        const double t_right = ev < events.size() ? events[ev].t : tau;
        const double pos_right_before =
            ev < events.size() ? events[ev].pos_before : pos_left;
        if (chain_t < t_left) {
          chain_t = t_left;
          chain_pos = pos_left;
          chain_rem = pos_left - pos_right_before;
        }
        if (chain_rem <= 0.0) {
          value = chain_pos;
          break;
        }
        const double kappa = m.negative.stable_scale;
        const double d1 = kappa * (ts - chain_t);
        const double d2 = kappa * (t_right - ts);
        if (d1 <= 0.0 || d2 <= 0.0) {
          value = chain_pos;
          break;
        }
        const double v = bridge_increment_quantile(*stable, d1, d2, chain_rem,
                                                   bridge_rng.uniform());
        value = chain_pos - v;
        chain_t = ts;
        chain_pos = value;
        chain_rem -= v;
        break;
      }
      default:
        value = pos_left;
    }
    out.push_back({f, -value});
  }
  return out;
}

}  // namespace

PassageOutcome simulate_first_passage(const ModelSpec& model, double u,
                                      RngStream& rng, const SimBudget& budget,
                                      const LevelScales& scales) {
  if (!(u > 0)) throw std::invalid_argument("simulate_first_passage: level");
  NullRecorder rec;
  return run_passage_path(model, u, rng, budget, scales, rec);
}

ConditionalSamples sample_conditional(const ModelSpec& model, double u,
                                      std::size_t n, std::uint64_t seed,
                                      int workers, const SimBudget& budget,
                                      std::span<const double> fractions,
                                      std::uint64_t attempt_ceiling) {
  if (n == 0) throw std::invalid_argument("sample_conditional: n must be >= 1");
  model.validate();
  const NormingBundle norm(model);
  const LevelScales sc{norm.space_scale(u), norm.passage_scale(u)};

  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t max_blocks =
      (attempt_ceiling + kBlock - 1) / kBlock;

  struct Hit {
    std::uint64_t rep;
    double tau, z, o;
  };

  std::atomic<std::uint64_t> next_block{0};
  std::atomic<bool> done{false};
  std::mutex mu;
  std::vector<Hit> hits;
  std::vector<std::int64_t> block_hits;  // -1 = incomplete, grown lazily
  std::uint64_t frontier = 0;            // blocks [0, frontier) complete
  std::uint64_t prefix_hits = 0;

  auto worker = [&]() {
    while (!done.load(std::memory_order_relaxed)) {
      const std::uint64_t b = next_block.fetch_add(1);
      if (b >= max_blocks) return;
      const std::uint64_t lo = b * kBlock;
      const std::uint64_t hi = std::min(lo + kBlock, attempt_ceiling);
      std::vector<Hit> local;
      for (std::uint64_t rep = lo; rep < hi; ++rep) {
        RngStream rng(seed, rep);
        NullRecorder rec;
        const auto out = run_passage_path(model, u, rng, budget, sc, rec);
        if (out.passed)
          local.push_back({rep, out.sample.passage_time,
                           out.sample.undershoot, out.sample.overshoot});
      }
      std::lock_guard<std::mutex> lock(mu);
      hits.insert(hits.end(), local.begin(), local.end());
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
  pool.reserve(nw);
  for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::sort(hits.begin(), hits.end(),
            [](const Hit& a, const Hit& b) { return a.rep < b.rep; });
  const std::uint64_t prefix_end = frontier * kBlock;

  ConditionalSamples result;
  result.ceiling = attempt_ceiling;
  std::vector<Hit> chosen;
  for (const auto& h : hits) {
    if (h.rep >= prefix_end) break;
    chosen.push_back(h);
    if (chosen.size() == n) break;
  }
  if (chosen.size() < n) {
    result.shortfall = true;
    result.attempts = std::min(prefix_end, attempt_ceiling);
  } else {
    result.attempts = chosen.back().rep + 1;
  }
  const double k = static_cast<double>(chosen.size());
  if (result.attempts > 0) {
    result.p_hat = k / static_cast<double>(result.attempts);
    result.p_se = std::sqrt(result.p_hat * (1.0 - result.p_hat) /
                            static_cast<double>(result.attempts));
  }

  // Replay the accepted replicates to reconstruct path snapshots.
  result.samples.resize(chosen.size());
  const StableDensity* stable = nullptr;
  std::unique_ptr<StableDensity> stable_store;
  if (model.negative.kind == NegKind::StableSubordinator) {
    stable_store = std::make_unique<StableDensity>(model.negative.gamma_bar);
    stable = stable_store.get();
  }
  std::atomic<std::size_t> next_idx{0};
  auto replayer = [&]() {
    while (true) {
      const std::size_t i = next_idx.fetch_add(1);
      if (i >= chosen.size()) return;
      const auto& h = chosen[i];
      RngStream rng(seed, h.rep);
      VectorRecorder rec;
      const auto out = run_passage_path(model, u, rng, budget, sc, rec);
      FirstPassageSample s = out.sample;
      s.replicate = h.rep;
      if (!fractions.empty()) {
        RngStream bridge_rng(seed, h.rep, 1);
        s.snapshots =
            reconstruct_snapshots(model, rec.events, s.passage_time,
                                  s.undershoot, fractions, bridge_rng, stable);
      }
      result.samples[i] = std::move(s);
    }
  };
  pool.clear();
  for (int i = 0; i < nw; ++i) pool.emplace_back(replayer);
  for (auto& th : pool) th.join();

  return result;
}

bool grid_oracle_passage(const ModelSpec& model, double u, std::uint64_t seed,
                         std::uint64_t replicate, double horizon, double dt) {
  if (model.negative.kind != NegKind::Drift)
    throw std::invalid_argument("grid_oracle_passage: drift models only");
  RngStream rng(seed, replicate);
  std::vector<std::pair<double, double>> jumps;  // (epoch, size)
  double t = 0.0;
  while (t < horizon) {
    t += rng.exponential(model.lambda_pos);
    if (t >= horizon) break;
    jumps.emplace_back(t, model.positive.sample(rng));
  }
  const double c = model.negative.drift_rate;
  double acc = 0.0;
  std::size_t j = 0;
  const auto value_at = [&](double s) { return acc - c * s; };
  for (double s = 0.0; s < horizon; s += dt) {
    while (j < jumps.size() && jumps[j].first <= s) acc += jumps[j++].second;
    if (value_at(s) > u) return true;
  }
  // Jump epochs themselves, where the maximum is attained.
  acc = 0.0;
  for (const auto& [epoch, size] : jumps) {
    acc += size;
    if (acc - c * epoch > u) return true;
  }
  return false;
}

namespace {
void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}
}  // namespace

std::string samples_to_csv(const ConditionalSamples& s,
                           std::span<const double> fractions) {
  std::string out = "replicate,u,tau,Z,O";
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    out += ",s" + std::to_string(i + 1) + ",x" + std::to_string(i + 1);
  }
  out += ",attempts\n";
  for (const auto& smp : s.samples) {
    out += std::to_string(smp.replicate);
    out += ',';
    append_double(out, smp.level);
    out += ',';
    append_double(out, smp.passage_time);
    out += ',';
    append_double(out, smp.undershoot);
    out += ',';
    append_double(out, smp.overshoot);
    for (const auto& snap : smp.snapshots) {
      out += ',';
      append_double(out, snap.fraction);
      out += ',';
      append_double(out, snap.dual_position);
    }
    out += ',' + std::to_string(smp.replicate + 1) + '\n';
  }
  return out;
}

}  // namespace levypass
