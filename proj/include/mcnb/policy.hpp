#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mcnb/environment.hpp"
#include "mcnb/kernels.hpp"
#include "mcnb/network.hpp"
#include "mcnb/optimizer.hpp"
#include "mcnb/rng.hpp"

namespace mcnb {

// periodic full-history refit cadence: every `warmup_every` rounds
// while t <= warmup_rounds, every `later_every` afterwards
struct RetrainSchedule {
  std::size_t warmup_rounds = 1000;
  std::size_t warmup_every = 10;
  std::size_t later_every = 100;

  bool due(std::size_t t) const {
    if (t <= warmup_rounds) return t % warmup_every == 0;
    return t % later_every == 0;
  }
};

struct PolicyConfig {
  double nu = 5.0;     // cluster tightness, threshold = (nu-1)/nu * gamma
  double gamma = 0.4;  // separation the environment is assumed to keep
  double s_norm = 1.0;
  double delta = 0.1;
  // lr_user and refit_lr are deliberately tiny: the per-user nets are fit
  // once in the cold phase and then held nearly frozen, because online user
  // drift feeds back through the append-only histories and degrades the
  // cluster estimates for good. lr_meta carries all the online learning.
  double lr_user = 0.0005;
  double lr_meta = 1.0;
  double refit_lr = 0.002;  // scheduled refits only, not member steps
  NetworkShape shape{0, 100, 2};
  OptimizerMode optimizer = OptimizerMode::sgd;  // refits only
  RetrainSchedule retrain;
  std::size_t meta_adapt_steps = 1;  // averaged meta steps per adaptation
  std::size_t refit_epochs = 2;
  double meta_bonus_scale = 1.0;
  bool center_at_init = true;  // score and fit f(x) - f_init(x) instead
  // cold phase (mcnb only): each user observes cold_items draws, then runs
  // cold_fit_epochs in-order plain-SGD passes over them at cold_lr. Plain
  // SGD here on purpose: the early-stopped gradient fit smooths reward
  // noise instead of interpolating it, and the cluster threshold needs
  // that margin. cold_items=1, cold_fit_epochs=0 is the bare protocol.
  std::size_t cold_items = 150;
  std::size_t cold_fit_epochs = 60;
  double cold_lr = 0.1;

  double threshold() const { return (nu - 1.0) / nu * gamma; }
  void validate() const;
};

struct UserLearnerState {
  std::size_t user_id = 0;
  ParamVector params;
  std::size_t serve_count = 0;  // always equals history.size()
  std::vector<std::pair<ArmContext, double>> history;
  OptimizerState opt;
};

struct MetaLearnerState {
  ParamVector params;
  ParamVector init_snapshot;  // shared start of every learner, never mutated
  OptimizerState opt;
};

struct ClusterEstimate {
  std::vector<std::size_t> members;  // ascending user ids, anchor included
  std::size_t anchor_user = 0;
  ArmContext anchor_arm;
  double threshold = 0.0;
};

struct ArmScore {
  double exploit = 0.0;
  double meta_bonus = 0.0;
  double user_bonus_s = 0.0;
  double user_bonus_log = 0.0;
  double total = 0.0;
  std::size_t cluster_size = 0;
};

struct ArmDecision {
  std::size_t chosen_index = 0;
  std::vector<ArmScore> scores;
  std::vector<std::size_t> chosen_cluster;  // members on the chosen arm
};

// Wall time spent in the three phases of one round
// (select_arm resets, update accumulates):
//   clustering: every cluster estimation scan
//   meta:       the persistent meta adaptation in update()
//   user:       per-member user steps plus any scheduled refit
// Per-arm transient adaptations and scoring are deliberately unmeasured,
// so the three phases lower-bound the full round time.
struct RoundTiming {
  double clustering_s = 0.0;
  double meta_s = 0.0;
  double user_s = 0.0;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual void cold_start(Environment& env, Rng& rng) = 0;
  virtual ArmDecision select_arm(std::size_t user,
                                 const std::vector<ArmContext>& arms,
                                 Rng& rng) = 0;
  virtual void update(std::size_t user, const ArmContext& arm, double reward,
                      Rng& rng) = 0;
  virtual RoundTiming last_timing() const { return {}; }
};

// Meta-learned clustering bandit: per-arm pipeline of cluster estimate,
// transient meta adaptation, and a UCB score; on feedback the chosen
// arm's adaptation persists and the cluster members each take one step.
class McnbPolicy : public Policy {
 public:
  McnbPolicy(const PolicyConfig& cfg, std::size_t n_users,
             std::uint64_t init_seed, Exec exec = Exec::serial);

  ClusterEstimate estimate_cluster(std::size_t anchor,
                                   const ArmContext& arm) const;
  // one (or cfg.meta_adapt_steps) averaged plain-SGD steps from the
  // current meta params over one drawn sample per member; pure
  ParamVector sgd_meta_adapt(const ClusterEstimate& cluster, Rng& rng) const;
  ArmScore ucb_score(const ArmContext& arm, const ParamVector& adapted,
                     std::size_t mu) const;

  void cold_start(Environment& env, Rng& rng) override;
  ArmDecision select_arm(std::size_t user,
                         const std::vector<ArmContext>& arms,
                         Rng& rng) override;
  void update(std::size_t user, const ArmContext& arm, double reward,
              Rng& rng) override;
  RoundTiming last_timing() const override { return timing_; }

  std::size_t n_users() const { return users_.size(); }
  const PolicyConfig& config() const { return cfg_; }
  const UserLearnerState& user_state(std::size_t u) const;
  UserLearnerState& mutable_user_state(std::size_t u);
  const MetaLearnerState& meta_state() const { return meta_; }
  MetaLearnerState& mutable_meta_state() { return meta_; }
  std::size_t rounds_seen() const { return round_count_; }
  bool cold_started() const { return cold_started_; }

  // serialization hooks (see serialization.hpp)
  void restore(MetaLearnerState meta, std::vector<UserLearnerState> users,
               std::size_t round_count, bool cold_started);

 private:
  double centered_forward(const ParamVector& params,
                          const ArmContext& x) const;
  double adjusted_target(const ArmContext& x, double reward) const;

  PolicyConfig cfg_;
  Exec exec_;
  MetaLearnerState meta_;
  std::vector<UserLearnerState> users_;
  std::size_t round_count_ = 0;
  bool cold_started_ = false;
  RoundTiming timing_;
};

// Neural UCB baseline over a diagonal design matrix: `one` shares a
// single learner across users, `ind` keeps one per user.
class NeuUcbPolicy : public Policy {
 public:
  enum class Mode { one, ind };

  NeuUcbPolicy(Mode mode, const PolicyConfig& cfg, double alpha,
               double lambda, std::size_t n_users, std::uint64_t init_seed);

  void cold_start(Environment& env, Rng& rng) override;
  ArmDecision select_arm(std::size_t user,
                         const std::vector<ArmContext>& arms,
                         Rng& rng) override;
  void update(std::size_t user, const ArmContext& arm, double reward,
              Rng& rng) override;
  RoundTiming last_timing() const override { return timing_; }

 private:
  struct Learner {
    ParamVector params;
    ParamVector init;  // for optional centering
    std::vector<double> design;  // diagonal lambda*1 + sum g*g / m
    std::vector<std::pair<ArmContext, double>> history;
    OptimizerState opt;
  };
  Learner& learner_for(std::size_t user);
  double adjusted_target(const Learner& ln, const ArmContext& x,
                         double reward) const;

  Mode mode_;
  PolicyConfig cfg_;
  double alpha_;
  double lambda_;
  std::vector<Learner> learners_;  // one entry, or one per user
  std::size_t round_count_ = 0;
  bool cold_started_ = false;
  RoundTiming timing_;
};

class UniformRandomPolicy : public Policy {
 public:
  void cold_start(Environment&, Rng&) override {}
  ArmDecision select_arm(std::size_t user,
                         const std::vector<ArmContext>& arms,
                         Rng& rng) override;
  void update(std::size_t, const ArmContext&, double, Rng&) override {}
};

// Seed of the transient-adaptation rng stream for one arm within one
// select_arm call. Derived from the arm's contents, so arms with equal
// contexts draw identical samples and tie exactly.
std::uint64_t arm_stream_seed(std::uint64_t salt, const ArmContext& arm);

// policy ids: mcnb, neuucb-one, neuucb-ind, uniform-random
std::unique_ptr<Policy> make_policy(const std::string& id,
                                    const PolicyConfig& cfg,
                                    std::size_t n_users,
                                    std::uint64_t init_seed, double alpha,
                                    double lambda, Exec exec);

}  // namespace mcnb
