#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "levypass/config.hpp"
#include "levypass/ladder.hpp"
#include "levypass/limit_laws.hpp"
#include "levypass/norming.hpp"
#include "levypass/simulate.hpp"
#include "levypass/stable_law.hpp"
#include "levypass/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace levypass;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config(read_file(path));
}

std::string level_token(double u) {
  std::string s = format_double(u);
  for (char& c : s)
    if (c == '.') c = 'p';
  return s;
}

// ---- limits ----------------------------------------------------------

struct LawInfo {
  int dims;
  std::vector<std::string> axes;
};

int cmd_limits(const std::string& law, double beta, double gamma_bar,
               const std::vector<double>& grid, const std::string& out_path) {
  static const std::map<std::string, LawInfo> laws_table = {
      {"local-i", {1, {"t"}}},    {"local-ii", {1, {"t"}}},
      {"Y0", {2, {"z", "x"}}},    {"Y1", {2, {"z", "x"}}},
      {"J11", {3, {"z", "x", "t"}}}, {"J12", {3, {"z", "x", "t"}}},
      {"J111", {2, {"z", "x"}}},  {"J113", {2, {"z", "x"}}},
      {"J112", {1, {"t"}}},       {"J114", {1, {"t"}}},
      {"prop1-i", {1, {"x"}}},    {"prop1-ii", {1, {"x"}}},
      {"f-i", {1, {"z"}}},        {"f-ii", {1, {"z"}}},
  };
  const auto it = laws_table.find(law);
  if (it == laws_table.end()) {
    std::cerr << "unknown law selector '" << law << "'\n";
    return kExitUsage;
  }
  const double gamma = 1.0 - gamma_bar;
  std::shared_ptr<StableDensity> sd;
  auto stable = [&]() -> const StableDensity& {
    if (!sd) sd = std::make_shared<StableDensity>(gamma_bar);
    return *sd;
  };

  auto eval = [&](const std::vector<double>& v) -> double {
    using namespace levypass::laws;
    const TailCase rv = TailCase::RegularVariation;
    const TailCase gm = TailCase::Gumbel;
    if (law == "local-i") return passage_local_density(rv, beta, v[0]);
    if (law == "local-ii") return passage_local_density(gm, beta, v[0]);
    if (law == "Y0") return joint_vu_density(rv, beta, v[0], v[1]);
    if (law == "Y1") return joint_vu_density(gm, beta, v[0], v[1]);
    if (law == "J11")
      return joint_vuw_density(rv, beta, stable(), v[0], v[1], v[2]);
    if (law == "J12")
      return joint_vuw_density(gm, beta, stable(), v[0], v[1], v[2]);
    if (law == "J111") return marginal_vu_density(rv, beta, gamma, v[0], v[1]);
    if (law == "J113") return marginal_vu_density(gm, beta, gamma, v[0], v[1]);
    if (law == "J112") return marginal_w_density(rv, beta, stable(), v[0]);
    if (law == "J114") return marginal_w_density(gm, beta, stable(), v[0]);
    if (law == "prop1-i") return overshoot_density(rv, beta, v[0]);
    if (law == "prop1-ii") return overshoot_density(gm, beta, v[0]);
    if (law == "f-i") return undershoot_factor(rv, beta, gamma, v[0]);
    if (law == "f-ii") return undershoot_factor(gm, beta, gamma, v[0]);
    return 0.0;
  };

  const int dims = it->second.dims;
  std::string csv;
  for (const auto& axis : it->second.axes) csv += axis + ",";
  csv += "density\n";
  std::vector<std::size_t> idx(dims, 0);
  if (!grid.empty()) {
    while (true) {
      std::vector<double> point(dims);
      for (int d = 0; d < dims; ++d) point[d] = grid[idx[d]];
      for (int d = 0; d < dims; ++d) csv += format_double(point[d]) + ",";
      csv += format_double(eval(point)) + "\n";
      int d = dims - 1;
      while (d >= 0 && ++idx[d] == grid.size()) {
        idx[d] = 0;
        --d;
      }
      if (d < 0) break;
    }
  }
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    write_file(out_path, csv);
  }
  return kExitPass;
}

// ---- simulate --------------------------------------------------------

int cmd_simulate(const ExperimentConfig& cfg) {
  if (!cfg.model) {
    std::cerr << "config has no model section\n";
    return kExitUsage;
  }
  if (cfg.levels.empty()) {
    std::cerr << "config has no levels\n";
    return kExitUsage;
  }
  const auto t0 = std::chrono::steady_clock::now();
  json manifest;
  manifest["run_id"] = cfg.run_id;
  manifest["config_hash"] = config_hash(cfg);
  json level_info = json::array();
  bool any_shortfall = false;
  for (double u : cfg.levels) {
    const auto res = sample_conditional(
        *cfg.model, u, cfg.samples_per_level, cfg.seed, cfg.workers,
        cfg.budget, cfg.snapshot_fractions, cfg.attempt_ceiling);
    any_shortfall = any_shortfall || res.shortfall;
    const std::string csv = samples_to_csv(res, cfg.snapshot_fractions);
    const fs::path file = fs::path(cfg.out_dir) /
                          (cfg.run_id + "_u" + level_token(u) + ".csv");
    write_file(file, csv);
    json info;
    info["u"] = u;
    info["file"] = file.filename().string();
    info["n"] = res.samples.size();
    info["attempts"] = res.attempts;
    info["p_hat"] = res.p_hat;
    info["p_se"] = res.p_se;
    info["shortfall"] = res.shortfall;
    level_info.push_back(info);
    std::cout << "u=" << u << " n=" << res.samples.size()
              << " attempts=" << res.attempts << " p_hat=" << res.p_hat
              << (res.shortfall ? " SHORTFALL" : "") << "\n";
  }
  manifest["levels"] = level_info;
  manifest["wall_clock_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_file(fs::path(cfg.out_dir) / (cfg.run_id + "_manifest.json"),
             manifest.dump(2) + "\n");
  return any_shortfall ? kExitFail : kExitPass;
}

// ---- verify ----------------------------------------------------------

json ecdf_report_to_json(const EcdfReport& r) {
  json j;
  j["law"] = r.law_id;
  j["n"] = r.n;
  j["ks"] = r.ks;
  j["wasserstein1"] = r.wasserstein;
  j["norm_a"] = r.norm_a;
  j["norm_r"] = r.norm_r;
  json q = json::array();
  for (const auto& row : r.quantiles)
    q.push_back({{"p", row.p}, {"sample", row.empirical}});
  j["quantiles"] = q;
  return j;
}

int cmd_verify(const ExperimentConfig& cfg, const std::string& samples_dir,
               const std::string& report_path) {
  if (!cfg.model) {
    std::cerr << "config has no model section\n";
    return kExitUsage;
  }
  if (!fs::exists(samples_dir)) {
    std::cerr << "samples directory '" << samples_dir << "' does not exist\n";
    return kExitUsage;
  }
  const ModelSpec& model = *cfg.model;
  const RegimeTag tag = model.classify();
  const NormingBundle norm(model);
  const LevelTargets targets = make_level_targets(model);
  const VerifySettings& vs = cfg.verify;

  json report;
  report["run_id"] = cfg.run_id;
  report["tolerances"] = {{"ks_overshoot", vs.ks_overshoot_tol},
                          {"ks_undershoot", vs.ks_undershoot_tol},
                          {"ks_passage", vs.ks_passage_tol},
                          {"local_pass_fraction", vs.local_pass_fraction}};
  json levels = json::array();
  std::vector<LevelRow> rows;
  bool all_pass = true;
  std::string distance_csv = "u,n,ks_overshoot,ks_undershoot,ks_passage\n";

  for (double u : cfg.levels) {
    const fs::path file = fs::path(samples_dir) /
                          (cfg.run_id + "_u" + level_token(u) + ".csv");
    if (!fs::exists(file)) {
      std::cerr << "missing sample file " << file << "\n";
      return kExitUsage;
    }
    std::vector<double> fractions;
    const auto samples = samples_from_csv(read_file(file), &fractions);
    const double a = norm.space_scale(u);
    const double r = norm.passage_scale(u);
    std::vector<double> o, z, tau;
    std::vector<std::pair<double, double>> zt, zo;
    for (const auto& s : samples.samples) {
      o.push_back(s.overshoot / a);
      z.push_back(s.undershoot / a);
      tau.push_back(s.passage_time / r);
      zt.emplace_back(s.undershoot / a, s.passage_time / r);
      zo.emplace_back(s.undershoot / a, s.overshoot / a);
    }
    auto rep_o = make_ecdf_report(o, targets.overshoot_cdf, nullptr,
                                  targets.overshoot_id, a, r, 200.0);
    auto rep_z = make_ecdf_report(z, targets.undershoot_cdf, nullptr,
                                  targets.undershoot_id, a, r, 200.0);
    auto rep_t = make_ecdf_report(tau, targets.passage_cdf, nullptr,
                                  targets.passage_id, a, r, 200.0);
    json jl;
    jl["u"] = u;
    jl["n"] = samples.samples.size();
    jl["p_hat"] = samples.p_hat;
    jl["overshoot"] = ecdf_report_to_json(rep_o);
    jl["undershoot"] = ecdf_report_to_json(rep_z);
    jl["passage"] = ecdf_report_to_json(rep_t);
    const bool is_last = u == *std::max_element(cfg.levels.begin(),
                                                cfg.levels.end());
    bool level_pass = true;
    if (is_last) {
      level_pass = rep_o.ks <= vs.ks_overshoot_tol &&
                   rep_z.ks <= vs.ks_undershoot_tol &&
                   rep_t.ks <= vs.ks_passage_tol;
    }
    if (targets.has_local) {
      const auto local = local_density_check(
          zt, targets.local_joint_density, vs.window_z_lo, vs.window_z_hi,
          vs.window_t_lo, vs.window_t_hi, vs.bins_z, vs.bins_t);
      json lj;
      lj["bins"] = local.bins.size();
      lj["pass_fraction"] = local.pass_fraction;
      lj["n_in_window"] = local.n_in_window;
      lj["insufficient"] = local.insufficient;
      jl["local_density"] = lj;
      if (is_last)
        level_pass = level_pass && !local.insufficient &&
                     local.pass_fraction >= vs.local_pass_fraction;
    }
    {
      const auto cond = conditional_overshoot_check(zo, tag.tail_case,
                                                    tag.beta, vs.strata);
      json cj;
      cj["pass"] = cond.pass;
      cj["max_pairwise_ks"] = cond.max_pairwise_ks;
      cj["pairwise_critical"] = cond.pairwise_critical;
      json st = json::array();
      for (const auto& s : cond.strata)
        st.push_back({{"z_mean", s.z_mean},
                      {"n", s.n},
                      {"ks", s.ks_vs_limit},
                      {"critical", s.critical},
                      {"pass", s.pass}});
      cj["strata"] = st;
      jl["conditional_overshoot"] = cj;
    }
    jl["pass"] = level_pass;
    all_pass = all_pass && level_pass;
    levels.push_back(jl);
    rows.push_back({u, samples.samples.size(), rep_o.ks, rep_z.ks, rep_t.ks});
    distance_csv += format_double(u) + "," +
                    std::to_string(samples.samples.size()) + "," +
                    format_double(rep_o.ks) + "," + format_double(rep_z.ks) +
                    "," + format_double(rep_t.ks) + "\n";

    // density overlays: scaled histograms against the target laws
    std::string overlay = "quantity,x,empirical_density,target_cdf\n";
    auto add_overlay = [&](const char* name, std::vector<double> v,
                           const std::function<double(double)>& cdf) {
      std::sort(v.begin(), v.end());
      const double xmax = 5.0;
      const int cells = 50;
      const double h = xmax / cells;
      for (int i = 0; i < cells; ++i) {
        const double lo2 = i * h, hi2 = lo2 + h;
        const double frac = ecdf_value(v, hi2) - ecdf_value(v, lo2);
        overlay += std::string(name) + "," + format_double(lo2 + 0.5 * h) +
                   "," + format_double(frac / h) + "," +
                   format_double(cdf(lo2 + 0.5 * h)) + "\n";
      }
    };
    add_overlay("overshoot", o, targets.overshoot_cdf);
    add_overlay("undershoot", z, targets.undershoot_cdf);
    add_overlay("passage", tau, targets.passage_cdf);
    write_file(fs::path(cfg.out_dir) /
                   (cfg.run_id + "_u" + level_token(u) + "_overlay.csv"),
               overlay);
  }
  const auto trend = convergence_trend(rows);
  report["levels"] = levels;
  report["trend_ok"] = trend.trend_ok;
  report["single_level"] = trend.single_level;
  if (rows.size() >= 2) all_pass = all_pass && trend.trend_ok;
  report["pass"] = all_pass;

  const fs::path out = report_path.empty()
                           ? fs::path(cfg.out_dir) /
                                 (cfg.run_id + "_verify.json")
                           : fs::path(report_path);
  write_file(out, report.dump(2) + "\n");
  write_file(fs::path(cfg.out_dir) / (cfg.run_id + "_distances.csv"),
             distance_csv);
  std::cout << (all_pass ? "PASS" : "FAIL") << " verification report -> "
            << out.string() << "\n";
  return all_pass ? kExitPass : kExitFail;
}

// ---- ladder ----------------------------------------------------------

json identity_rows_to_json(const std::vector<IdentityRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"u", r.u},
                   {"lhs", r.lhs},
                   {"rhs", r.rhs},
                   {"lhs_se", r.lhs_se},
                   {"rhs_se", r.rhs_se},
                   {"ratio", r.ratio},
                   {"rel_gap", r.rel_gap},
                   {"combined_rel_ci", r.combined_rel_ci},
                   {"pass", r.pass}});
  return arr;
}

int cmd_ladder(const ExperimentConfig& cfg) {
  if (!cfg.ladder) {
    std::cerr << "config has no ladder section\n";
    return kExitUsage;
  }
  const LadderSettings& ls = *cfg.ladder;
  const WalkSpec walk = ls.walk();
  const auto est_a =
      estimate_ladder(walk, ls.n_paths, ls.horizon, ls.grid, cfg.seed,
                      cfg.workers, ls.check_u, ls.stop_depth);
  const auto est_b =
      estimate_ladder(walk, ls.n_paths, ls.horizon, ls.grid, cfg.seed + 1,
                      cfg.workers, ls.check_u, ls.stop_depth);

  const auto inv = check_vigon_inverse(est_a, est_b, walk);
  const auto dpos = check_vigon_direct_pos(est_a, est_b, walk, ls.check_u);
  const auto dneg = check_vigon_direct_neg(est_a, est_b, walk, ls.check_u);

  bool pass = true;
  for (const auto& r : inv) pass = pass && r.pass;
  for (const auto& r : dpos) pass = pass && r.pass;
  for (const auto& r : dneg) pass = pass && r.pass;

  // ladder survival consistency under the Poisson clock
  const double lhs = std::exp(-est_a.q_hat);
  const double se = std::sqrt(std::pow(est_a.q_se * lhs, 2) +
                              std::pow(est_a.p_h1_finite_se, 2));
  const bool kill_ok = std::abs(lhs - est_a.p_h1_finite) <= 1.96 * se;
  pass = pass && kill_ok;

  json report;
  report["run_id"] = cfg.run_id;
  report["q_hat"] = est_a.q_hat;
  report["q_se"] = est_a.q_se;
  report["p_hat"] = est_a.p_hat;
  report["killing_survival"] = {{"exp_minus_q", lhs},
                                {"p_h1_finite", est_a.p_h1_finite},
                                {"se", se},
                                {"pass", kill_ok}};
  report["mean_weak_ladder"] = est_a.mean_weak_ladder;
  report["late_max_fraction"] = est_a.late_max_fraction;
  report["vigon_inverse"] = identity_rows_to_json(inv);
  report["vigon_direct_pos"] = identity_rows_to_json(dpos);
  report["vigon_direct_neg"] = identity_rows_to_json(dneg);
  report["pass"] = pass;
  write_file(fs::path(cfg.out_dir) / (cfg.run_id + "_ladder.json"),
             report.dump(2) + "\n");

  std::string csv = "x,pi_h_tail,pi_h_tail_se,g_star,g_star_se,a_hstar,a_hstar_se\n";
  for (std::size_t j = 0; j < est_a.grid_edges.size(); ++j) {
    csv += format_double(est_a.grid_edges[j]) + "," +
           format_double(est_a.pi_h_tail[j]) + "," +
           format_double(est_a.pi_h_tail_se[j]) + "," +
           format_double(est_a.g_star[j]) + "," +
           format_double(est_a.g_star_se[j]) + "," +
           format_double(est_a.a_hstar[j]) + "," +
           format_double(est_a.a_hstar_se[j]) + "\n";
  }
  write_file(fs::path(cfg.out_dir) / (cfg.run_id + "_ladder_grid.csv"), csv);
  std::cout << (pass ? "PASS" : "FAIL") << " ladder report, q_hat="
            << est_a.q_hat << "\n";
  return pass ? kExitPass : kExitFail;
}

// ---- report (multi-level distance table) ------------------------------

int cmd_report(const ExperimentConfig& cfg, const std::string& samples_dir) {
  return cmd_verify(cfg, samples_dir, "");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heavy-tailed first-passage simulation and limit-law toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_override, samples_dir, law, out_path;
  std::uint64_t seed_override = 0;
  int workers_override = 0;
  bool validate_only = false;
  double beta = 2.0, gamma_bar = 0.5;
  std::vector<double> grid;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "experiment file");
    if (needs_config) opt->required();
    sub->add_option("--out", out_override, "output directory override");
    sub->add_option("--seed", seed_override, "seed override");
    sub->add_option("--workers", workers_override, "worker count override");
    sub->add_flag("--validate", validate_only, "parse and validate only");
  };

  auto* limits = app.add_subcommand("limits", "evaluate limit laws on a grid");
  limits->add_option("--law", law, "law selector")->required();
  limits->add_option("--beta", beta, "tail exponent");
  limits->add_option("--gamma-bar", gamma_bar, "stable index");
  limits->add_option("--grid", grid, "grid values, applied per axis")
      ->delimiter(',');
  limits->add_option("--out-file", out_path, "output CSV path");

  auto* simulate = app.add_subcommand("simulate", "run passage campaigns");
  add_common(simulate, true);
  auto* verify = app.add_subcommand("verify", "compare samples to limits");
  add_common(verify, true);
  verify->add_option("--samples", samples_dir, "sample directory")->required();
  auto* ladder = app.add_subcommand("ladder", "ladder estimation and checks");
  add_common(ladder, true);
  auto* report = app.add_subcommand("report", "distance table across levels");
  add_common(report, true);
  report->add_option("--samples", samples_dir, "sample directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (limits->parsed()) return cmd_limits(law, beta, gamma_bar, grid, out_path);

    ExperimentConfig cfg = load_config(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (seed_override != 0) cfg.seed = seed_override;
    if (workers_override > 0) cfg.workers = workers_override;
    if (validate_only) {
      std::cout << "config ok: " << serialize_config(cfg);
      return kExitPass;
    }
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (verify->parsed()) return cmd_verify(cfg, samples_dir, "");
    if (ladder->parsed()) return cmd_ladder(cfg);
    if (report->parsed()) return cmd_report(cfg, samples_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}
