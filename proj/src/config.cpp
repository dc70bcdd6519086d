#include "levypass/config.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"

namespace levypass {

namespace {

using nlohmann::json;

void expect_keys(const json& j, const std::set<std::string>& allowed,
                 const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

JumpFamily parse_family(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("family"))
    throw ConfigError(where + ": expected an object with a 'family' key");
  const std::string fam = j.at("family").get<std::string>();
  if (fam == "pareto") {
    expect_keys(j, {"family", "beta", "scale"}, where);
    return JumpFamily::pareto(j.at("beta").get<double>(),
                              j.at("scale").get<double>());
  }
  if (fam == "weibull") {
    expect_keys(j, {"family", "kappa", "scale"}, where);
    return JumpFamily::weibull(j.at("kappa").get<double>(),
                               j.at("scale").get<double>());
  }
  if (fam == "lognormal") {
    expect_keys(j, {"family", "mu", "sigma"}, where);
    return JumpFamily::lognormal(j.at("mu").get<double>(),
                                 j.at("sigma").get<double>());
  }
  throw ConfigError(where + ": unknown family '" + fam + "'");
}

json family_to_json(const JumpFamily& f) {
  json j;
  switch (f.kind) {
    case JumpKind::Pareto:
      j["family"] = "pareto";
      j["beta"] = f.shape;
      j["scale"] = f.scale;
      break;
    case JumpKind::Weibull:
      j["family"] = "weibull";
      j["kappa"] = f.shape;
      j["scale"] = f.scale;
      break;
    case JumpKind::Lognormal:
      j["family"] = "lognormal";
      j["mu"] = f.scale;
      j["sigma"] = f.shape;
      break;
  }
  return j;
}

ModelSpec parse_model(const json& j) {
  expect_keys(j, {"positive", "lambda_pos", "negative"}, "model");
  const JumpFamily pos = parse_family(j.at("positive"), "model.positive");
  const double lambda = j.at("lambda_pos").get<double>();
  const json& neg = j.at("negative");
  const std::string kind = neg.at("kind").get<std::string>();
  NegativeComponent nc;
  if (kind == "drift") {
    expect_keys(neg, {"kind", "rate"}, "model.negative");
    nc = NegativeComponent::drift(neg.at("rate").get<double>());
  } else if (kind == "compound_poisson") {
    expect_keys(neg, {"kind", "family", "rate"}, "model.negative");
    nc = NegativeComponent::compound_poisson(
        parse_family(neg.at("family"), "model.negative.family"),
        neg.at("rate").get<double>());
  } else if (kind == "stable") {
    expect_keys(neg, {"kind", "gamma_bar", "scale"}, "model.negative");
    nc = NegativeComponent::stable(
        neg.at("gamma_bar").get<double>(),
        neg.contains("scale") ? neg.at("scale").get<double>() : 1.0);
  } else {
    throw ConfigError("model.negative: unknown kind '" + kind + "'");
  }
  return ModelSpec(pos, lambda, nc);
}

json model_to_json(const ModelSpec& m) {
  json j;
  j["positive"] = family_to_json(m.positive);
  j["lambda_pos"] = m.lambda_pos;
  json neg;
  switch (m.negative.kind) {
    case NegKind::Drift:
      neg["kind"] = "drift";
      neg["rate"] = m.negative.drift_rate;
      break;
    case NegKind::CompoundPoisson:
      neg["kind"] = "compound_poisson";
      neg["family"] = family_to_json(m.negative.step);
      neg["rate"] = m.negative.rate;
      break;
    case NegKind::StableSubordinator:
      neg["kind"] = "stable";
      neg["gamma_bar"] = m.negative.gamma_bar;
      neg["scale"] = m.negative.stable_scale;
      break;
  }
  j["negative"] = neg;
  return j;
}

VerifySettings parse_verify(const json& j) {
  expect_keys(j,
              {"window_z", "window_t", "bins_z", "bins_t", "ks_overshoot_tol",
               "ks_undershoot_tol", "ks_passage_tol", "local_pass_fraction",
               "strata"},
              "verify");
  VerifySettings v;
  if (j.contains("window_z")) {
    v.window_z_lo = j.at("window_z").at(0).get<double>();
    v.window_z_hi = j.at("window_z").at(1).get<double>();
  }
  if (j.contains("window_t")) {
    v.window_t_lo = j.at("window_t").at(0).get<double>();
    v.window_t_hi = j.at("window_t").at(1).get<double>();
  }
  if (j.contains("bins_z")) v.bins_z = j.at("bins_z").get<int>();
  if (j.contains("bins_t")) v.bins_t = j.at("bins_t").get<int>();
  if (j.contains("ks_overshoot_tol"))
    v.ks_overshoot_tol = j.at("ks_overshoot_tol").get<double>();
  if (j.contains("ks_undershoot_tol"))
    v.ks_undershoot_tol = j.at("ks_undershoot_tol").get<double>();
  if (j.contains("ks_passage_tol"))
    v.ks_passage_tol = j.at("ks_passage_tol").get<double>();
  if (j.contains("local_pass_fraction"))
    v.local_pass_fraction = j.at("local_pass_fraction").get<double>();
  if (j.contains("strata")) v.strata = j.at("strata").get<int>();
  return v;
}

json verify_to_json(const VerifySettings& v) {
  json j;
  j["window_z"] = {v.window_z_lo, v.window_z_hi};
  j["window_t"] = {v.window_t_lo, v.window_t_hi};
  j["bins_z"] = v.bins_z;
  j["bins_t"] = v.bins_t;
  j["ks_overshoot_tol"] = v.ks_overshoot_tol;
  j["ks_undershoot_tol"] = v.ks_undershoot_tol;
  j["ks_passage_tol"] = v.ks_passage_tol;
  j["local_pass_fraction"] = v.local_pass_fraction;
  j["strata"] = v.strata;
  return j;
}

LadderSettings parse_ladder(const json& j) {
  expect_keys(j,
              {"p_pos", "positive", "negative", "n_paths", "horizon",
               "stop_depth", "grid", "check_u"},
              "ladder");
  LadderSettings s;
  s.p_pos = j.at("p_pos").get<double>();
  s.positive = parse_family(j.at("positive"), "ladder.positive");
  s.negative = parse_family(j.at("negative"), "ladder.negative");
  if (j.contains("n_paths")) s.n_paths = j.at("n_paths").get<std::uint64_t>();
  if (j.contains("horizon")) s.horizon = j.at("horizon").get<std::uint64_t>();
  if (j.contains("stop_depth")) s.stop_depth = j.at("stop_depth").get<double>();
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    expect_keys(g, {"lo", "hi", "cells"}, "ladder.grid");
    s.grid = GridSpec{g.at("lo").get<double>(), g.at("hi").get<double>(),
                      g.at("cells").get<int>()};
  }
  if (j.contains("check_u"))
    s.check_u = j.at("check_u").get<std::vector<double>>();
  return s;
}

json ladder_to_json(const LadderSettings& s) {
  json j;
  j["p_pos"] = s.p_pos;
  j["positive"] = family_to_json(s.positive);
  j["negative"] = family_to_json(s.negative);
  j["n_paths"] = s.n_paths;
  j["horizon"] = s.horizon;
  j["stop_depth"] = s.stop_depth;
  j["grid"] = {{"lo", s.grid.lo}, {"hi", s.grid.hi}, {"cells", s.grid.cells}};
  j["check_u"] = s.check_u;
  return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  expect_keys(j,
              {"run_id", "seed", "workers", "out_dir", "model", "levels",
               "samples_per_level", "budget", "snapshot_fractions", "verify",
               "ladder"},
              "config");
  ExperimentConfig cfg;
  if (j.contains("run_id")) cfg.run_id = j.at("run_id").get<std::string>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("model")) cfg.model = parse_model(j.at("model"));
  if (j.contains("levels"))
    cfg.levels = j.at("levels").get<std::vector<double>>();
  if (j.contains("samples_per_level"))
    cfg.samples_per_level = j.at("samples_per_level").get<std::size_t>();
  if (j.contains("budget")) {
    const json& b = j.at("budget");
    expect_keys(b, {"t_cap", "depth_cap", "max_events", "attempt_ceiling"},
                "budget");
    if (b.contains("t_cap")) cfg.budget.t_cap = b.at("t_cap").get<double>();
    if (b.contains("depth_cap"))
      cfg.budget.depth_cap = b.at("depth_cap").get<double>();
    if (b.contains("max_events"))
      cfg.budget.max_events = b.at("max_events").get<std::uint64_t>();
    if (b.contains("attempt_ceiling"))
      cfg.attempt_ceiling = b.at("attempt_ceiling").get<std::uint64_t>();
  }
  if (j.contains("snapshot_fractions"))
    cfg.snapshot_fractions =
        j.at("snapshot_fractions").get<std::vector<double>>();
  if (j.contains("verify")) cfg.verify = parse_verify(j.at("verify"));
  if (j.contains("ladder")) cfg.ladder = parse_ladder(j.at("ladder"));

  if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
  for (double f : cfg.snapshot_fractions)
    if (!(f > 0.0 && f <= 1.0))
      throw ConfigError("snapshot fractions must lie in (0, 1]");
  if (cfg.model) cfg.model->validate();
  if (cfg.ladder) (void)cfg.ladder->walk();
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json j;
  j["run_id"] = cfg.run_id;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["out_dir"] = cfg.out_dir;
  if (cfg.model) j["model"] = model_to_json(*cfg.model);
  j["levels"] = cfg.levels;
  j["samples_per_level"] = cfg.samples_per_level;
  j["budget"] = {{"t_cap", cfg.budget.t_cap},
                 {"depth_cap", cfg.budget.depth_cap},
                 {"max_events", cfg.budget.max_events},
                 {"attempt_ceiling", cfg.attempt_ceiling}};
  j["snapshot_fractions"] = cfg.snapshot_fractions;
  j["verify"] = verify_to_json(cfg.verify);
  if (cfg.ladder) j["ladder"] = ladder_to_json(*cfg.ladder);
  return j.dump(2) + "\n";
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string s = serialize_config(cfg);
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ConditionalSamples samples_from_csv(const std::string& text,
                                    std::vector<double>* fractions) {
  ConditionalSamples out;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("samples csv: empty file");
  // header: replicate,u,tau,Z,O[,s_i,x_i...],attempts
  std::size_t n_cols = 1;
  for (char c : line)
    if (c == ',') ++n_cols;
  if (n_cols < 6 || (n_cols - 6) % 2 != 0)
    throw ConfigError("samples csv: unexpected header layout");
  const std::size_t n_snap = (n_cols - 6) / 2;
  bool have_fractions = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    vals.reserve(n_cols);
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      double v = 0.0;
      const auto res = std::from_chars(p, comma, v);
      if (res.ec != std::errc())
        throw ConfigError("samples csv: bad number in row");
      vals.push_back(v);
      if (comma == end) break;
      p = comma + 1;
    }
    if (vals.size() != n_cols)
      throw ConfigError("samples csv: wrong column count in row");
    FirstPassageSample s;
    s.replicate = static_cast<std::uint64_t>(vals[0]);
    s.level = vals[1];
    s.passage_time = vals[2];
    s.undershoot = vals[3];
    s.overshoot = vals[4];
    for (std::size_t k = 0; k < n_snap; ++k)
      s.snapshots.push_back({vals[5 + 2 * k], vals[6 + 2 * k]});
    if (!have_fractions && fractions != nullptr) {
      fractions->clear();
      for (const auto& snap : s.snapshots) fractions->push_back(snap.fraction);
      have_fractions = true;
    }
    out.attempts = static_cast<std::uint64_t>(vals.back());
    out.samples.push_back(std::move(s));
  }
  if (!out.samples.empty()) {
    out.p_hat = static_cast<double>(out.samples.size()) /
                static_cast<double>(out.attempts);
    out.p_se = std::sqrt(out.p_hat * (1.0 - out.p_hat) /
                         static_cast<double>(out.attempts));
  }
  return out;
}

}  // namespace levypass
