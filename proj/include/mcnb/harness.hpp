#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcnb/environment.hpp"
#include "mcnb/policy.hpp"

namespace mcnb {

enum class EnvKind { synthetic, classification, rating };

// parsed "environment" block of an experiment config; the synthetic
// defaults are the desk-scale reference experiment
struct EnvConfig {
  EnvKind kind = EnvKind::synthetic;
  SyntheticEnvSpec synthetic{
      .n_users = 30, .dim = 10, .arms_per_round = 10, .n_groups = 3,
      .reward_family = RewardFamily::linear, .noise_std = 0.05,
      .gamma_gap = 0.4, .seed = 7};       // kind == synthetic
  std::string path;                     // dataset kinds
  double rating_threshold = 3.0;        // kind == rating
  std::size_t rating_arms_per_round = 10;
};

struct ExperimentConfig {
  EnvConfig env;
  std::string policy_id = "mcnb";
  PolicyConfig policy;   // shape.input_dim filled from the environment
  double alpha = 0.01;   // neuucb exploration weight
  double lambda = 1.0;   // neuucb design regularizer
  std::size_t horizon = 2000;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string out_dir = "out";
  std::size_t window = 500;
  Exec exec = Exec::serial;

  void validate() const;
};

// strict parse: unknown keys are rejected with the offending field named
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::string& path);
nlohmann::json env_config_to_json(const EnvConfig& env);

std::unique_ptr<Environment> make_environment(const EnvConfig& env,
                                              std::uint64_t run_seed);

struct RoundRecord {
  std::size_t t = 0;
  std::size_t user = 0;
  std::size_t arm = 0;
  double reward = 0;
  double optimal = 0;       // best hidden expected reward this round
  double inst_regret = 0;   // optimal minus expected reward of the pick
  double cum_regret = 0;
};

struct ClusterRecord {
  std::size_t t = 0;
  double precision = 0;
  double recall = 0;
  std::size_t est_size = 0;
  std::size_t true_size = 0;
};

struct TimingRecord {
  std::size_t t = 0;
  double clustering_s = 0;
  double meta_s = 0;
  double user_s = 0;
};

struct SeedTrace {
  std::uint64_t seed = 0;
  std::vector<RoundRecord> rounds;
  std::vector<ClusterRecord> clusters;  // empty without ground truth
  std::vector<TimingRecord> timing;
  double final_cum_regret = 0;
};

// one fully deterministic seeded run: cold start then `horizon` rounds;
// regret always against hidden expected rewards, never realizations
SeedTrace run_single(const ExperimentConfig& cfg, Environment& env,
                     std::uint64_t seed);

struct RunResult {
  std::vector<SeedTrace> seeds;
};

// runs every configured seed and writes seed_<s>/{regret,clusters,timing}.csv
// plus summary.json under cfg.out_dir
RunResult run_experiment(const ExperimentConfig& cfg);

void write_seed_artifacts(const SeedTrace& trace, const std::string& dir);
nlohmann::json summarize(const ExperimentConfig& cfg, const RunResult& result);

struct WindowPoint {
  std::size_t end_t = 0;
  double value = 0;
};

struct WindowedRegret {
  std::vector<WindowPoint> window_means;       // non-overlapping windows
  std::vector<WindowPoint> cumulative_average; // cum_regret(end)/end
};

WindowedRegret windowed_average_regret(const std::vector<RoundRecord>& rounds,
                                       std::size_t window);

struct TimingSummary {
  double clustering_s = 0;
  double meta_s = 0;
  double user_s = 0;
};

TimingSummary timing_breakdown(const std::vector<TimingRecord>& timing);
double clustering_ratio(const TimingSummary& small_run,
                        const TimingSummary& large_run);

struct CompareRow {
  std::string dir;
  std::string policy;
  double mean_final = 0;
  double std_final = 0;
  std::size_t n_seeds = 0;
};

struct ComparePair {
  std::string better;  // dir names
  std::string worse;
  std::size_t wins = 0;  // seeds where `better` finished strictly lower
  std::size_t n = 0;
};

struct CompareResult {
  std::vector<CompareRow> rows;    // ascending mean final regret
  std::vector<ComparePair> pairs;  // adjacent rows, paired-seed sign counts
};

// reads <dir>/summary.json from every input; all runs must share the
// environment, horizon and seed list
CompareResult compare_runs(const std::vector<std::string>& dirs);
nlohmann::json compare_to_json(const CompareResult& result);

}  // namespace mcnb
