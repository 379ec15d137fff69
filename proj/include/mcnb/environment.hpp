#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mcnb/network.hpp"
#include "mcnb/rng.hpp"

namespace mcnb {

enum class RewardFamily { linear, quadratic, cosine };

struct SyntheticEnvSpec {
  std::size_t n_users = 0;
  std::size_t dim = 0;
  std::size_t arms_per_round = 0;
  std::size_t n_groups = 0;  // reward groups per region
  RewardFamily reward_family = RewardFamily::linear;
  double noise_std = 0.0;
  double gamma_gap = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// One bandit round. Policies only ever see (user, arms); the remaining
// fields feed the metrics layer.
struct Round {
  std::size_t user = 0;
  std::vector<ArmContext> arms;
  std::vector<double> expected_rewards;  // for the serving user, per arm
  // members of the serving user's true cluster per arm; empty vectors
  // when the environment has no cluster ground truth
  std::vector<std::vector<std::size_t>> true_clusters;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::size_t n_users() const = 0;
  virtual std::size_t arms_per_round() const = 0;
  virtual std::size_t context_dim() const = 0;
  virtual bool has_cluster_truth() const = 0;
  virtual Round gen_round(std::size_t t, Rng& rng) = 0;
  virtual double sample_reward(const Round& round, std::size_t arm,
                               Rng& rng) = 0;
  // one (context, reward) observation for `user`, for policy cold starts
  virtual std::pair<ArmContext, double> cold_item(std::size_t user,
                                                  Rng& rng) = 0;
};

// Synthetic world with known reward functions and arm-dependent
// clusters. Arm space splits on arm[0] >= 0 into two regions; each
// region carries its own grouping of users into n_groups groups, so two
// users can share a cluster in one region and split in the other.
//
// Documented closed form, for group g in the arm's region with unit
// direction w_{region,g} and phase p_{region,g}:
//   base(x) = <w,x>/2 + 1/2            (linear)
//           = <w,x>^2                  (quadratic)
//           = (cos(3<w,x> + p) + 1)/2  (cosine)
//   h_u(x)  = clip01(level_g + amp * (base(x) - 1/2))
// with amp = ((1 - 2*eps) - gamma*(q-1))/q at eps = 0.01 and
// level_g = eps + amp/2 + g*(gamma + amp). Groups on one arm then
// differ by at least gamma + amp - amp = gamma whenever amp > 0, so
// feasible specs certify on the first try; infeasible (gamma, q) pairs
// exhaust the resampling budget and raise a structured error.
class SyntheticEnv : public Environment {
 public:
  explicit SyntheticEnv(const SyntheticEnvSpec& spec);

  std::size_t n_users() const override { return spec_.n_users; }
  std::size_t arms_per_round() const override { return spec_.arms_per_round; }
  std::size_t context_dim() const override { return spec_.dim; }
  bool has_cluster_truth() const override { return true; }
  Round gen_round(std::size_t t, Rng& rng) override;
  double sample_reward(const Round& round, std::size_t arm,
                       Rng& rng) override;
  std::pair<ArmContext, double> cold_item(std::size_t user,
                                          Rng& rng) override;

  double expected_reward(std::size_t user, const ArmContext& arm) const;
  double sample_reward(std::size_t user, const ArmContext& arm,
                       Rng& rng) const;
  // group index of `user` in the region owning `arm`
  std::size_t group_of(std::size_t user, const ArmContext& arm) const;
  std::vector<std::size_t> true_cluster_members(std::size_t user,
                                                const ArmContext& arm) const;

  const SyntheticEnvSpec& spec() const { return spec_; }
  // reward-surface parameters, exposed for diagnostics and verification
  double amp() const { return amp_; }
  const std::vector<double>& levels() const { return levels_; }
  const std::vector<double>& direction(int region, std::size_t group) const {
    return dir_[region][group];
  }
  double phase(int region, std::size_t group) const {
    return phase_[region][group];
  }

 private:
  bool certify_gap(const std::vector<ArmContext>& arms) const;

  SyntheticEnvSpec spec_;
  double amp_ = 0.0;
  std::vector<double> levels_;
  std::vector<std::size_t> labels_[2];     // per region, per user
  std::vector<std::vector<double>> dir_[2];  // per region, per group
  std::vector<double> phase_[2];
};

// --- dataset-backed environments ---

struct ClassificationData {
  std::vector<std::size_t> labels;
  std::vector<std::vector<double>> features;  // unit-normalized
  std::size_t n_classes = 0;
};
ClassificationData load_classification_csv(const std::string& path);

struct RatingData {
  std::vector<std::size_t> user_ids;
  std::vector<std::vector<double>> features;  // unit-normalized
  std::vector<double> ratings;
};
RatingData load_rating_csv(const std::string& path);

// K block embeddings of a unit feature: arm i holds the feature in
// block i of a d*K vector, zeros elsewhere
std::vector<ArmContext> build_classification_arms(
    const std::vector<double>& feature, std::size_t k);

// Classification rows as a bandit: the serving user is the row's class,
// reward 1 exactly on the arm whose block index matches it. On the arm
// with block i the true clusters are {i} and everyone else.
class ClassificationEnv : public Environment {
 public:
  explicit ClassificationEnv(ClassificationData data);

  std::size_t n_users() const override { return data_.n_classes; }
  std::size_t arms_per_round() const override { return data_.n_classes; }
  std::size_t context_dim() const override;
  bool has_cluster_truth() const override { return true; }
  Round gen_round(std::size_t t, Rng& rng) override;
  double sample_reward(const Round& round, std::size_t arm,
                       Rng& rng) override;
  // guaranteed-reward observation: a class-u row embedded in block u
  std::pair<ArmContext, double> cold_item(std::size_t user,
                                          Rng& rng) override;

 private:
  ClassificationData data_;
  std::vector<std::vector<std::size_t>> rows_by_class_;
};

// Rating rows as a bandit: each round serves one of the user's
// positively rated items plus K-1 of their zero-reward items, shuffled.
// No cluster ground truth.
class RatingEnv : public Environment {
 public:
  RatingEnv(RatingData data, double threshold, std::size_t arms_per_round);

  std::size_t n_users() const override { return users_.size(); }
  std::size_t arms_per_round() const override { return k_; }
  std::size_t context_dim() const override;
  bool has_cluster_truth() const override { return false; }
  Round gen_round(std::size_t t, Rng& rng) override;
  double sample_reward(const Round& round, std::size_t arm,
                       Rng& rng) override;
  std::pair<ArmContext, double> cold_item(std::size_t user,
                                          Rng& rng) override;

 private:
  RatingData data_;
  double threshold_ = 0.0;
  std::size_t k_ = 0;
  std::vector<std::size_t> users_;  // ids with >= 1 positive and 1 negative
  std::vector<std::vector<std::size_t>> positives_;  // row ids per user slot
  std::vector<std::vector<std::size_t>> negatives_;
};

// Single-user world with iid uniform expected rewards per (round, arm)
// and no noise; a calibration target for policy-free regret checks.
class IidUniformEnv : public Environment {
 public:
  IidUniformEnv(std::size_t arms_per_round, std::size_t dim)
      : k_(arms_per_round), dim_(dim) {}

  std::size_t n_users() const override { return 1; }
  std::size_t arms_per_round() const override { return k_; }
  std::size_t context_dim() const override { return dim_; }
  bool has_cluster_truth() const override { return false; }
  Round gen_round(std::size_t t, Rng& rng) override;
  double sample_reward(const Round& round, std::size_t arm,
                       Rng& rng) override;
  std::pair<ArmContext, double> cold_item(std::size_t user,
                                          Rng& rng) override;

 private:
  std::size_t k_ = 0;
  std::size_t dim_ = 0;
};

}  // namespace mcnb
