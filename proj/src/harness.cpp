#include "mcnb/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "mcnb/errors.hpp"
#include "mcnb/rng.hpp"

namespace mcnb {

namespace {

void reject_unknown_keys(const nlohmann::json& j, const std::string& where,
                         const std::set<std::string>& allowed) {
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError(where + "." + item.key(), "unknown field");
    }
  }
}

double get_num(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) {
    throw ConfigError(path, "expected a number");
  }
  return j.get<double>();
}

bool is_nonneg_int(const nlohmann::json& j) {
  return j.is_number_unsigned() ||
         (j.is_number_integer() && j.get<long long>() >= 0);
}

std::size_t get_count(const nlohmann::json& j, const std::string& path) {
  if (!is_nonneg_int(j)) {
    throw ConfigError(path, "expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

std::string get_str(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) {
    throw ConfigError(path, "expected a string");
  }
  return j.get<std::string>();
}

bool get_bool(const nlohmann::json& j, const std::string& path) {
  if (!j.is_boolean()) {
    throw ConfigError(path, "expected a boolean");
  }
  return j.get<bool>();
}

RewardFamily family_from_string(const std::string& s,
                                const std::string& path) {
  if (s == "linear") return RewardFamily::linear;
  if (s == "quadratic") return RewardFamily::quadratic;
  if (s == "cosine") return RewardFamily::cosine;
  throw ConfigError(path, "unknown reward family '" + s + "'");
}

std::string family_to_string(RewardFamily f) {
  switch (f) {
    case RewardFamily::linear: return "linear";
    case RewardFamily::quadratic: return "quadratic";
    case RewardFamily::cosine: return "cosine";
  }
  return "linear";
}

void parse_env_block(const nlohmann::json& j, EnvConfig& env) {
  const std::string type =
      j.contains("type") ? get_str(j.at("type"), "environment.type")
                         : std::string("synthetic");
  if (type == "synthetic") {
    env.kind = EnvKind::synthetic;
    reject_unknown_keys(j, "environment",
                        {"type", "n_users", "dim", "arms_per_round",
                         "n_groups", "noise_std", "gamma_gap", "family",
                         "seed"});
    auto& s = env.synthetic;
    if (j.contains("n_users"))
      s.n_users = get_count(j.at("n_users"), "environment.n_users");
    if (j.contains("dim")) s.dim = get_count(j.at("dim"), "environment.dim");
    if (j.contains("arms_per_round"))
      s.arms_per_round =
          get_count(j.at("arms_per_round"), "environment.arms_per_round");
    if (j.contains("n_groups"))
      s.n_groups = get_count(j.at("n_groups"), "environment.n_groups");
    if (j.contains("noise_std"))
      s.noise_std = get_num(j.at("noise_std"), "environment.noise_std");
    if (j.contains("gamma_gap"))
      s.gamma_gap = get_num(j.at("gamma_gap"), "environment.gamma_gap");
    if (j.contains("family"))
      s.reward_family = family_from_string(
          get_str(j.at("family"), "environment.family"), "environment.family");
    if (j.contains("seed")) {
      if (!is_nonneg_int(j.at("seed"))) {
        throw ConfigError("environment.seed",
                          "expected a non-negative integer");
      }
      s.seed = j.at("seed").get<std::uint64_t>();
    }
  } else if (type == "classification") {
    env.kind = EnvKind::classification;
    reject_unknown_keys(j, "environment", {"type", "path"});
    if (!j.contains("path")) {
      throw ConfigError("environment.path", "required for dataset modes");
    }
    env.path = get_str(j.at("path"), "environment.path");
  } else if (type == "rating") {
    env.kind = EnvKind::rating;
    reject_unknown_keys(j, "environment",
                        {"type", "path", "rating_threshold",
                         "arms_per_round"});
    if (!j.contains("path")) {
      throw ConfigError("environment.path", "required for dataset modes");
    }
    env.path = get_str(j.at("path"), "environment.path");
    if (j.contains("rating_threshold"))
      env.rating_threshold =
          get_num(j.at("rating_threshold"), "environment.rating_threshold");
    if (j.contains("arms_per_round"))
      env.rating_arms_per_round =
          get_count(j.at("arms_per_round"), "environment.arms_per_round");
  } else {
    throw ConfigError("environment.type",
                      "unknown environment type '" + type + "'");
  }
}

void parse_policy_block(const nlohmann::json& j, ExperimentConfig& cfg) {
  reject_unknown_keys(
      j, "policy",
      {"id", "width", "depth", "nu", "gamma", "s_norm", "delta", "lr_user",
       "lr_meta", "refit_lr", "optimizer", "meta_adapt_steps", "refit_epochs",
       "meta_bonus_scale", "center_at_init", "cold_items", "cold_fit_epochs",
       "cold_lr", "alpha", "lambda", "retrain"});
  if (j.contains("id")) cfg.policy_id = get_str(j.at("id"), "policy.id");
  PolicyConfig& p = cfg.policy;
  if (j.contains("width"))
    p.shape.width = get_count(j.at("width"), "policy.width");
  if (j.contains("depth"))
    p.shape.depth = get_count(j.at("depth"), "policy.depth");
  if (j.contains("nu")) p.nu = get_num(j.at("nu"), "policy.nu");
  if (j.contains("gamma")) p.gamma = get_num(j.at("gamma"), "policy.gamma");
  if (j.contains("s_norm"))
    p.s_norm = get_num(j.at("s_norm"), "policy.s_norm");
  if (j.contains("delta")) p.delta = get_num(j.at("delta"), "policy.delta");
  if (j.contains("lr_user"))
    p.lr_user = get_num(j.at("lr_user"), "policy.lr_user");
  if (j.contains("lr_meta"))
    p.lr_meta = get_num(j.at("lr_meta"), "policy.lr_meta");
  if (j.contains("refit_lr"))
    p.refit_lr = get_num(j.at("refit_lr"), "policy.refit_lr");
  if (j.contains("optimizer")) {
    const std::string o = get_str(j.at("optimizer"), "policy.optimizer");
    if (o == "sgd") {
      p.optimizer = OptimizerMode::sgd;
    } else if (o == "adam") {
      p.optimizer = OptimizerMode::adam;
    } else {
      throw ConfigError("policy.optimizer", "unknown optimizer '" + o + "'");
    }
  }
  if (j.contains("meta_adapt_steps"))
    p.meta_adapt_steps =
        get_count(j.at("meta_adapt_steps"), "policy.meta_adapt_steps");
  if (j.contains("refit_epochs"))
    p.refit_epochs = get_count(j.at("refit_epochs"), "policy.refit_epochs");
  if (j.contains("meta_bonus_scale"))
    p.meta_bonus_scale =
        get_num(j.at("meta_bonus_scale"), "policy.meta_bonus_scale");
  if (j.contains("center_at_init"))
    p.center_at_init =
        get_bool(j.at("center_at_init"), "policy.center_at_init");
  if (j.contains("cold_items"))
    p.cold_items = get_count(j.at("cold_items"), "policy.cold_items");
  if (j.contains("cold_fit_epochs"))
    p.cold_fit_epochs =
        get_count(j.at("cold_fit_epochs"), "policy.cold_fit_epochs");
  if (j.contains("cold_lr"))
    p.cold_lr = get_num(j.at("cold_lr"), "policy.cold_lr");
  if (j.contains("alpha")) cfg.alpha = get_num(j.at("alpha"), "policy.alpha");
  if (j.contains("lambda"))
    cfg.lambda = get_num(j.at("lambda"), "policy.lambda");
  if (j.contains("retrain")) {
    const auto& r = j.at("retrain");
    reject_unknown_keys(r, "policy.retrain",
                        {"warmup_rounds", "warmup_every", "later_every"});
    if (r.contains("warmup_rounds"))
      p.retrain.warmup_rounds =
          get_count(r.at("warmup_rounds"), "policy.retrain.warmup_rounds");
    if (r.contains("warmup_every"))
      p.retrain.warmup_every =
          get_count(r.at("warmup_every"), "policy.retrain.warmup_every");
    if (r.contains("later_every"))
      p.retrain.later_every =
          get_count(r.at("later_every"), "policy.retrain.later_every");
  }
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

void ExperimentConfig::validate() const {
  if (horizon < 1) {
    throw ConfigError("horizon", "must be at least 1");
  }
  if (seeds.empty()) {
    throw ConfigError("seeds", "at least one seed required");
  }
  if (window < 1 || window > horizon) {
    throw ConfigError("window", "must lie in [1, horizon]");
  }
  if (out_dir.empty()) {
    throw ConfigError("out_dir", "must not be empty");
  }
  static const std::set<std::string> kIds = {
      "mcnb", "neuucb-one", "neuucb-ind", "uniform-random", "oracle"};
  if (!kIds.count(policy_id)) {
    throw ConfigError("policy.id", "unknown policy '" + policy_id + "'");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("policy.alpha", "must be finite and non-negative");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("policy.lambda", "must be finite and positive");
  }
  PolicyConfig probe = policy;
  if (probe.shape.input_dim == 0) {
    probe.shape.input_dim = 1;  // filled from the environment at run time
  }
  probe.validate();
  if (env.kind == EnvKind::synthetic) {
    env.synthetic.validate();
  } else if (env.path.empty()) {
    throw ConfigError("environment.path", "must not be empty");
  }
  if (env.kind == EnvKind::rating) {
    if (env.rating_arms_per_round < 1) {
      throw ConfigError("environment.arms_per_round", "must be at least 1");
    }
    if (!std::isfinite(env.rating_threshold)) {
      throw ConfigError("environment.rating_threshold", "must be finite");
    }
  }
}

ExperimentConfig parse_experiment_config(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw ConfigError("(root)", "config must be a JSON object");
  }
  reject_unknown_keys(doc, "(root)",
                      {"environment", "policy", "horizon", "seeds", "out_dir",
                       "window", "exec"});
  ExperimentConfig cfg;
  if (doc.contains("environment")) {
    if (!doc.at("environment").is_object()) {
      throw ConfigError("environment", "expected an object");
    }
    parse_env_block(doc.at("environment"), cfg.env);
  }
  if (doc.contains("policy")) {
    if (!doc.at("policy").is_object()) {
      throw ConfigError("policy", "expected an object");
    }
    parse_policy_block(doc.at("policy"), cfg);
  }
  if (doc.contains("horizon"))
    cfg.horizon = get_count(doc.at("horizon"), "horizon");
  if (doc.contains("seeds")) {
    const auto& js = doc.at("seeds");
    if (!js.is_array() || js.empty()) {
      throw ConfigError("seeds", "expected a non-empty array");
    }
    cfg.seeds.clear();
    for (const auto& s : js) {
      if (!is_nonneg_int(s)) {
        throw ConfigError("seeds", "expected non-negative integers");
      }
      cfg.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  if (doc.contains("out_dir"))
    cfg.out_dir = get_str(doc.at("out_dir"), "out_dir");
  if (doc.contains("window"))
    cfg.window = get_count(doc.at("window"), "window");
  if (doc.contains("exec")) {
    const std::string e = get_str(doc.at("exec"), "exec");
    if (e == "serial") {
      cfg.exec = Exec::serial;
    } else if (e == "parallel") {
      cfg.exec = Exec::parallel;
    } else {
      throw ConfigError("exec", "expected 'serial' or 'parallel'");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config " + path);
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataFormatError(std::string("invalid config JSON: ") + e.what());
  }
  return parse_experiment_config(doc);
}

nlohmann::json env_config_to_json(const EnvConfig& env) {
  switch (env.kind) {
    case EnvKind::synthetic:
      return {{"type", "synthetic"},
              {"n_users", env.synthetic.n_users},
              {"dim", env.synthetic.dim},
              {"arms_per_round", env.synthetic.arms_per_round},
              {"n_groups", env.synthetic.n_groups},
              {"noise_std", env.synthetic.noise_std},
              {"gamma_gap", env.synthetic.gamma_gap},
              {"family", family_to_string(env.synthetic.reward_family)},
              {"seed", env.synthetic.seed}};
    case EnvKind::classification:
      return {{"type", "classification"}, {"path", env.path}};
    case EnvKind::rating:
      return {{"type", "rating"},
              {"path", env.path},
              {"rating_threshold", env.rating_threshold},
              {"arms_per_round", env.rating_arms_per_round}};
  }
  throw ConfigError("environment.type", "unhandled environment kind");
}

std::unique_ptr<Environment> make_environment(const EnvConfig& env,
                                              std::uint64_t run_seed) {
  switch (env.kind) {
    case EnvKind::synthetic: {
      SyntheticEnvSpec spec = env.synthetic;
      // fresh hidden structure per seed, reproducible from the config seed
      spec.seed = derive_seed(spec.seed, {run_seed});
      return std::make_unique<SyntheticEnv>(spec);
    }
    case EnvKind::classification:
      return std::make_unique<ClassificationEnv>(
          load_classification_csv(env.path));
    case EnvKind::rating:
      return std::make_unique<RatingEnv>(load_rating_csv(env.path),
                                         env.rating_threshold,
                                         env.rating_arms_per_round);
  }
  throw ConfigError("environment.type", "unhandled environment kind");
}

SeedTrace run_single(const ExperimentConfig& cfg, Environment& env,
                     std::uint64_t seed) {
  const bool oracle = cfg.policy_id == "oracle";
  PolicyConfig pc = cfg.policy;
  pc.shape.input_dim = env.context_dim();
  pc.validate();

  std::unique_ptr<Policy> policy;
  if (!oracle) {
    policy = make_policy(cfg.policy_id, pc, env.n_users(),
                         derive_seed(seed, {0x1A17}), cfg.alpha, cfg.lambda,
                         cfg.exec);
  }
  Rng rng(derive_seed(seed, {0x5EED}));
  if (policy) {
    policy->cold_start(env, rng);
  }

  SeedTrace trace;
  trace.seed = seed;
  trace.rounds.reserve(cfg.horizon);
  trace.timing.reserve(cfg.horizon);
  double cum = 0.0;
  for (std::size_t t = 1; t <= cfg.horizon; ++t) {
    Round round = env.gen_round(t, rng);
    ArmDecision dec;
    std::size_t chosen = 0;
    if (oracle) {
      for (std::size_t i = 1; i < round.expected_rewards.size(); ++i) {
        if (round.expected_rewards[i] > round.expected_rewards[chosen]) {
          chosen = i;
        }
      }
    } else {
      dec = policy->select_arm(round.user, round.arms, rng);
      chosen = dec.chosen_index;
    }
    const double reward = env.sample_reward(round, chosen, rng);
    if (policy) {
      policy->update(round.user, round.arms[chosen], reward, rng);
    }

    double best = round.expected_rewards.empty()
                      ? 0.0
                      : round.expected_rewards[0];
    for (double e : round.expected_rewards) best = std::max(best, e);
    const double inst = best - (chosen < round.expected_rewards.size()
                                    ? round.expected_rewards[chosen]
                                    : 0.0);
    cum += inst;
    trace.rounds.push_back({t, round.user, chosen, reward, best, inst, cum});

    TimingRecord tr;
    tr.t = t;
    if (policy) {
      const RoundTiming lt = policy->last_timing();
      tr.clustering_s = lt.clustering_s;
      tr.meta_s = lt.meta_s;
      tr.user_s = lt.user_s;
    }
    trace.timing.push_back(tr);

    if (env.has_cluster_truth() && !oracle && !dec.chosen_cluster.empty() &&
        chosen < round.true_clusters.size() &&
        !round.true_clusters[chosen].empty()) {
      const std::vector<std::size_t>& est = dec.chosen_cluster;
      const std::vector<std::size_t>& truth = round.true_clusters[chosen];
      std::vector<std::size_t> both;
      std::set_intersection(est.begin(), est.end(), truth.begin(),
                            truth.end(), std::back_inserter(both));
      ClusterRecord cr;
      cr.t = t;
      cr.precision =
          static_cast<double>(both.size()) / static_cast<double>(est.size());
      cr.recall =
          static_cast<double>(both.size()) / static_cast<double>(truth.size());
      cr.est_size = est.size();
      cr.true_size = truth.size();
      trace.clusters.push_back(cr);
    }
  }
  trace.final_cum_regret = cum;
  return trace;
}

void write_seed_artifacts(const SeedTrace& trace, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir + "/regret.csv");
    if (!out) throw IoError("cannot write " + dir + "/regret.csv");
    out << "t,user,arm,reward,optimal,inst_regret,cum_regret\n";
    for (const RoundRecord& r : trace.rounds) {
      out << r.t << ',' << r.user << ',' << r.arm << ',' << fmt_g(r.reward)
          << ',' << fmt_g(r.optimal) << ',' << fmt_g(r.inst_regret) << ','
          << fmt_g(r.cum_regret) << '\n';
    }
  }
  {
    std::ofstream out(dir + "/clusters.csv");
    if (!out) throw IoError("cannot write " + dir + "/clusters.csv");
    out << "t,precision,recall,est_size,true_size\n";
    for (const ClusterRecord& c : trace.clusters) {
      out << c.t << ',' << fmt_g(c.precision) << ',' << fmt_g(c.recall)
          << ',' << c.est_size << ',' << c.true_size << '\n';
    }
  }
  {
    std::ofstream out(dir + "/timing.csv");
    if (!out) throw IoError("cannot write " + dir + "/timing.csv");
    out << "t,clustering_s,meta_s,user_s\n";
    for (const TimingRecord& tr : trace.timing) {
      out << tr.t << ',' << fmt_g(tr.clustering_s) << ',' << fmt_g(tr.meta_s)
          << ',' << fmt_g(tr.user_s) << '\n';
    }
  }
}

WindowedRegret windowed_average_regret(const std::vector<RoundRecord>& rounds,
                                       std::size_t window) {
  if (window < 1 || window > rounds.size()) {
    throw ConfigError("window", "must lie in [1, rounds]");
  }
  WindowedRegret out;
  std::size_t start = 0;
  while (start < rounds.size()) {
    const std::size_t end = std::min(start + window, rounds.size());
    double sum = 0.0;
    for (std::size_t i = start; i < end; ++i) sum += rounds[i].inst_regret;
    out.window_means.push_back(
        {rounds[end - 1].t, sum / static_cast<double>(end - start)});
    out.cumulative_average.push_back(
        {rounds[end - 1].t,
         rounds[end - 1].cum_regret / static_cast<double>(end)});
    start = end;
  }
  return out;
}

TimingSummary timing_breakdown(const std::vector<TimingRecord>& timing) {
  TimingSummary s;
  if (timing.empty()) return s;
  for (const TimingRecord& tr : timing) {
    s.clustering_s += tr.clustering_s;
    s.meta_s += tr.meta_s;
    s.user_s += tr.user_s;
  }
  const double n = static_cast<double>(timing.size());
  s.clustering_s /= n;
  s.meta_s /= n;
  s.user_s /= n;
  return s;
}

double clustering_ratio(const TimingSummary& small_run,
                        const TimingSummary& large_run) {
  if (!(small_run.clustering_s > 0.0)) {
    throw Error("invalid_argument",
                "clustering baseline time must be positive");
  }
  return large_run.clustering_s / small_run.clustering_s;
}

nlohmann::json summarize(const ExperimentConfig& cfg,
                         const RunResult& result) {
  nlohmann::json doc;
  doc["format"] = "mcnb-summary-v1";
  doc["policy"] = cfg.policy_id;
  doc["horizon"] = cfg.horizon;
  doc["window"] = cfg.window;
  doc["environment"] = env_config_to_json(cfg.env);

  std::vector<double> finals;
  nlohmann::json per_seed = nlohmann::json::array();
  for (const SeedTrace& trace : result.seeds) {
    finals.push_back(trace.final_cum_regret);
    nlohmann::json entry;
    entry["seed"] = trace.seed;
    entry["final_cum_regret"] = trace.final_cum_regret;
    entry["mean_inst_regret"] =
        trace.rounds.empty()
            ? 0.0
            : trace.final_cum_regret /
                  static_cast<double>(trace.rounds.size());
    const WindowedRegret wr =
        windowed_average_regret(trace.rounds, cfg.window);
    nlohmann::json windows = nlohmann::json::array();
    for (const WindowPoint& p : wr.window_means) {
      windows.push_back({{"end", p.end_t}, {"mean", p.value}});
    }
    entry["windowed"] = std::move(windows);
    nlohmann::json cavg = nlohmann::json::array();
    for (const WindowPoint& p : wr.cumulative_average) {
      cavg.push_back({{"end", p.end_t}, {"value", p.value}});
    }
    entry["cumulative_average"] = std::move(cavg);
    if (trace.clusters.empty()) {
      entry["cluster_precision_mean"] = nullptr;
      entry["cluster_recall_mean"] = nullptr;
    } else {
      double ps = 0.0, rs = 0.0;
      for (const ClusterRecord& c : trace.clusters) {
        ps += c.precision;
        rs += c.recall;
      }
      const double n = static_cast<double>(trace.clusters.size());
      entry["cluster_precision_mean"] = ps / n;
      entry["cluster_recall_mean"] = rs / n;
    }
    const TimingSummary ts = timing_breakdown(trace.timing);
    entry["timing_mean"] = {{"clustering_s", ts.clustering_s},
                            {"meta_s", ts.meta_s},
                            {"user_s", ts.user_s}};
    per_seed.push_back(std::move(entry));
  }
  doc["per_seed"] = std::move(per_seed);
  doc["final_cum_regret"] = {{"mean", mean_of(finals)},
                             {"std", sample_std(finals)}};
  return doc;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  RunResult result;
  for (std::uint64_t seed : cfg.seeds) {
    std::unique_ptr<Environment> env = make_environment(cfg.env, seed);
    SeedTrace trace = run_single(cfg, *env, seed);
    write_seed_artifacts(trace,
                         cfg.out_dir + "/seed_" + std::to_string(seed));
    result.seeds.push_back(std::move(trace));
  }
  std::ofstream out(cfg.out_dir + "/summary.json");
  if (!out) throw IoError("cannot write " + cfg.out_dir + "/summary.json");
  out << summarize(cfg, result).dump(2) << "\n";
  return result;
}

CompareResult compare_runs(const std::vector<std::string>& dirs) {
  if (dirs.empty()) {
    throw Error("compare_mismatch", "no input directories given");
  }
  struct Loaded {
    std::string dir;
    std::string policy;
    std::size_t horizon = 0;
    nlohmann::json environment;
    std::vector<std::uint64_t> seeds;
    std::vector<double> finals;
  };
  std::vector<Loaded> runs;
  for (const std::string& dir : dirs) {
    const std::string path = dir + "/summary.json";
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw DataFormatError(path + ": " + e.what());
    }
    if (doc.value("format", std::string()) != "mcnb-summary-v1") {
      throw DataFormatError(path + ": unrecognized summary format");
    }
    Loaded run;
    run.dir = dir;
    run.policy = doc.at("policy").get<std::string>();
    run.horizon = doc.at("horizon").get<std::size_t>();
    run.environment = doc.at("environment");
    for (const auto& entry : doc.at("per_seed")) {
      run.seeds.push_back(entry.at("seed").get<std::uint64_t>());
      run.finals.push_back(entry.at("final_cum_regret").get<double>());
    }
    if (run.seeds.empty()) {
      throw DataFormatError(path + ": no seeds recorded");
    }
    runs.push_back(std::move(run));
  }
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].horizon != runs[0].horizon) {
      throw Error("compare_mismatch",
                  runs[i].dir + " ran horizon " +
                      std::to_string(runs[i].horizon) + ", expected " +
                      std::to_string(runs[0].horizon));
    }
    if (runs[i].environment != runs[0].environment) {
      throw Error("compare_mismatch",
                  runs[i].dir + " used a different environment spec");
    }
    if (runs[i].seeds != runs[0].seeds) {
      throw Error("compare_mismatch",
                  runs[i].dir + " used a different seed list");
    }
  }

  std::vector<std::size_t> order(runs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ma = mean_of(runs[a].finals);
    const double mb = mean_of(runs[b].finals);
    if (ma != mb) return ma < mb;
    return runs[a].dir < runs[b].dir;
  });

  CompareResult result;
  for (std::size_t idx : order) {
    const Loaded& run = runs[idx];
    result.rows.push_back({run.dir, run.policy, mean_of(run.finals),
                           sample_std(run.finals), run.seeds.size()});
  }
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const Loaded& a = runs[order[i]];
    const Loaded& b = runs[order[i + 1]];
    ComparePair pair;
    pair.better = a.dir;
    pair.worse = b.dir;
    pair.n = a.finals.size();
    for (std::size_t s = 0; s < a.finals.size(); ++s) {
      if (a.finals[s] < b.finals[s]) ++pair.wins;
    }
    result.pairs.push_back(pair);
  }
  return result;
}

nlohmann::json compare_to_json(const CompareResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const CompareRow& r : result.rows) {
    rows.push_back({{"dir", r.dir},
                    {"policy", r.policy},
                    {"mean_final", r.mean_final},
                    {"std_final", r.std_final},
                    {"n_seeds", r.n_seeds}});
  }
  nlohmann::json pairs = nlohmann::json::array();
  for (const ComparePair& p : result.pairs) {
    pairs.push_back({{"better", p.better},
                     {"worse", p.worse},
                     {"wins", p.wins},
                     {"n", p.n}});
  }
  return {{"rows", std::move(rows)}, {"pairs", std::move(pairs)}};
}

}  // namespace mcnb
