#include "mcnb/policy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>

#include "mcnb/errors.hpp"

namespace mcnb {

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::size_t argmax_lowest(const std::vector<ArmScore>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i].total > scores[best].total) best = i;
  }
  return best;
}

}  // namespace

std::uint64_t arm_stream_seed(std::uint64_t salt, const ArmContext& arm) {
  std::uint64_t h = mix_seed(salt);
  for (double v : arm) {
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof v);
    std::memcpy(&bits, &v, sizeof bits);
    h = mix_seed(h ^ mix_seed(bits));
  }
  return h;
}

void PolicyConfig::validate() const {
  if (!(nu > 1.0)) throw ConfigError("nu", "must be > 1");
  if (!(gamma > 0.0) || !(gamma < 1.0)) {
    throw ConfigError("gamma", "must lie in (0, 1)");
  }
  if (s_norm < 0.0) throw ConfigError("s_norm", "must be >= 0");
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw ConfigError("delta", "must lie in (0, 1)");
  }
  if (!(lr_user > 0.0)) throw ConfigError("lr_user", "must be > 0");
  if (!(lr_meta > 0.0)) throw ConfigError("lr_meta", "must be > 0");
  if (!(refit_lr > 0.0)) throw ConfigError("refit_lr", "must be > 0");
  shape.validate();
  if (meta_adapt_steps < 1) {
    throw ConfigError("meta_adapt_steps", "must be >= 1");
  }
  if (refit_epochs < 1) throw ConfigError("refit_epochs", "must be >= 1");
  if (retrain.warmup_every < 1) {
    throw ConfigError("retrain.warmup_every", "must be >= 1");
  }
  if (retrain.later_every < 1) {
    throw ConfigError("retrain.later_every", "must be >= 1");
  }
  if (meta_bonus_scale < 0.0) {
    throw ConfigError("meta_bonus_scale", "must be >= 0");
  }
  if (cold_items < 1) throw ConfigError("cold_items", "must be >= 1");
  if (!(cold_lr > 0.0)) throw ConfigError("cold_lr", "must be > 0");
}

McnbPolicy::McnbPolicy(const PolicyConfig& cfg, std::size_t n_users,
                       std::uint64_t init_seed, Exec exec)
    : cfg_(cfg), exec_(exec) {
  cfg_.validate();
  if (n_users == 0) throw ConfigError("n_users", "must be positive");
  meta_.init_snapshot = init_params(cfg_.shape, init_seed);
  meta_.params = meta_.init_snapshot;
  users_.resize(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    users_[u].user_id = u;
    users_[u].params = meta_.init_snapshot;
  }
}

const UserLearnerState& McnbPolicy::user_state(std::size_t u) const {
  if (u >= users_.size()) {
    throw Error("unknown_user", "no user " + std::to_string(u));
  }
  return users_[u];
}

UserLearnerState& McnbPolicy::mutable_user_state(std::size_t u) {
  if (u >= users_.size()) {
    throw Error("unknown_user", "no user " + std::to_string(u));
  }
  return users_[u];
}

double McnbPolicy::centered_forward(const ParamVector& params,
                                    const ArmContext& x) const {
  double f = forward(params, x);
  if (cfg_.center_at_init) f -= forward(meta_.init_snapshot, x);
  return f;
}

double McnbPolicy::adjusted_target(const ArmContext& x, double reward) const {
  // fitting f - f_init to r is fitting f to r + f_init
  if (cfg_.center_at_init) return reward + forward(meta_.init_snapshot, x);
  return reward;
}

ClusterEstimate McnbPolicy::estimate_cluster(std::size_t anchor,
                                             const ArmContext& arm) const {
  if (anchor >= users_.size()) {
    throw Error("unknown_user", "no user " + std::to_string(anchor));
  }
  std::vector<const ParamVector*> params;
  params.reserve(users_.size());
  for (const auto& u : users_) params.push_back(&u.params);
  // a shared centering offset cancels inside the distances
  const std::vector<double> preds = forward_over_params(params, arm, exec_);
  ClusterEstimate est;
  est.anchor_user = anchor;
  est.anchor_arm = arm;
  est.threshold = cfg_.threshold();
  for (std::size_t u = 0; u < users_.size(); ++u) {
    if (std::fabs(preds[u] - preds[anchor]) <= est.threshold) {
      est.members.push_back(u);
    }
  }
  return est;
}

ParamVector McnbPolicy::sgd_meta_adapt(const ClusterEstimate& cluster,
                                       Rng& rng) const {
  if (cluster.members.empty()) {
    throw Error("invalid_argument", "cluster has no members");
  }
  for (std::size_t u : cluster.members) {
    if (user_state(u).history.empty()) {
      throw Error("empty_history",
                  "user " + std::to_string(u) +
                      " has no observations; cold start must run first");
    }
  }
  ParamVector adapted = meta_.params;
  OptimizerState scratch;  // plain SGD leaves it untouched
  const double inv = 1.0 / static_cast<double>(cluster.members.size());
  for (std::size_t step = 0; step < cfg_.meta_adapt_steps; ++step) {
    GradientVector acc = zero_params(cfg_.shape);
    // one uniform draw per member, consumed in ascending member order
    for (std::size_t u : cluster.members) {
      const auto& hist = users_[u].history;
      const auto& [x, r] = hist[rng.uniform_index(hist.size())];
      GradientVector g =
          loss_and_grad(adapted, x, adjusted_target(x, r)).second;
      for (std::size_t i = 0; i < acc.values.size(); ++i) {
        acc.values[i] += inv * g.values[i];
      }
    }
    apply_step(adapted, acc, scratch, OptimizerMode::sgd, cfg_.lr_meta);
  }
  return adapted;
}

ArmScore McnbPolicy::ucb_score(const ArmContext& arm,
                               const ParamVector& adapted,
                               std::size_t mu) const {
  if (mu == 0) {
    throw Error("zero_serve_count",
                "scoring needs serve count >= 1; cold start must run first");
  }
  const double m = static_cast<double>(cfg_.shape.width);
  const double mu_d = static_cast<double>(mu);
  Evaluation ev = value_and_grad(adapted, arm);
  GradientVector g0 = backward(meta_.init_snapshot, arm);
  ArmScore s;
  s.exploit = ev.value;
  if (cfg_.center_at_init) s.exploit -= forward(meta_.init_snapshot, arm);
  s.meta_bonus = cfg_.meta_bonus_scale * grad_l2_distance(ev.grad, g0) /
                 std::pow(m, 0.25);
  s.user_bonus_s = std::sqrt((cfg_.s_norm + 1.0) / (2.0 * mu_d));
  s.user_bonus_log = std::sqrt(2.0 * std::log(1.0 / cfg_.delta) / mu_d);
  s.total = s.exploit + s.meta_bonus + s.user_bonus_s + s.user_bonus_log;
  return s;
}

void McnbPolicy::cold_start(Environment& env, Rng& rng) {
  if (cold_started_) {
    throw Error("already_cold_started", "cold start may only run once");
  }
  if (env.n_users() != users_.size()) {
    throw DimensionError("cold_start users", users_.size(), env.n_users());
  }
  for (auto& u : users_) {
    for (std::size_t c = 0; c < cfg_.cold_items; ++c) {
      auto [x, r] = env.cold_item(u.user_id, rng);
      if (x.size() != cfg_.shape.input_dim) {
        throw DimensionError("cold_start context", cfg_.shape.input_dim,
                             x.size());
      }
      u.history.emplace_back(std::move(x), r);
    }
    u.serve_count = cfg_.cold_items;
    OptimizerState cold_opt;
    for (std::size_t e = 0; e < cfg_.cold_fit_epochs; ++e) {
      for (const auto& [x, r] : u.history) {
        GradientVector g =
            loss_and_grad(u.params, x, adjusted_target(x, r)).second;
        apply_step(u.params, g, cold_opt, OptimizerMode::sgd, cfg_.cold_lr);
      }
    }
  }
  cold_started_ = true;
}

ArmDecision McnbPolicy::select_arm(std::size_t user,
                                   const std::vector<ArmContext>& arms,
                                   Rng& rng) {
  if (!cold_started_) {
    throw Error("cold_start_required", "select_arm before cold start");
  }
  if (arms.empty()) {
    throw Error("invalid_argument", "select_arm needs at least one arm");
  }
  if (user >= users_.size()) {
    throw Error("unknown_user", "no user " + std::to_string(user));
  }
  timing_ = {};
  // per-arm rng streams split off one salt so a cloned rng reproduces
  // every score, whatever the execution order
  const std::uint64_t salt = rng.next_u64();
  ArmDecision decision;
  decision.scores.resize(arms.size());
  std::vector<ClusterEstimate> clusters(arms.size());
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const double t0 = now_s();
    clusters[i] = estimate_cluster(user, arms[i]);
    timing_.clustering_s += now_s() - t0;
    Rng arm_rng(arm_stream_seed(salt, arms[i]));
    const ParamVector adapted = sgd_meta_adapt(clusters[i], arm_rng);
    decision.scores[i] =
        ucb_score(arms[i], adapted, users_[user].serve_count);
    decision.scores[i].cluster_size = clusters[i].members.size();
  }
  decision.chosen_index = argmax_lowest(decision.scores);
  decision.chosen_cluster = clusters[decision.chosen_index].members;
  return decision;
}

void McnbPolicy::update(std::size_t user, const ArmContext& arm,
                        double reward, Rng& rng) {
  if (!cold_started_) {
    throw Error("cold_start_required", "update before cold start");
  }
  if (!(reward >= 0.0 && reward <= 1.0)) {
    throw Error("invalid_reward",
                "reward " + std::to_string(reward) + " outside [0, 1]");
  }
  double t0 = now_s();
  const ClusterEstimate cluster = estimate_cluster(user, arm);
  timing_.clustering_s += now_s() - t0;

  t0 = now_s();
  meta_.params = sgd_meta_adapt(cluster, rng);  // the one persistent call
  timing_.meta_s += now_s() - t0;

  t0 = now_s();
  OptimizerState scratch;
  for (std::size_t u : cluster.members) {
    UserLearnerState& st = users_[u];
    GradientVector g =
        loss_and_grad(st.params, arm, adjusted_target(arm, reward)).second;
    apply_step(st.params, g, scratch, OptimizerMode::sgd, cfg_.lr_user);
    st.serve_count += 1;
    st.history.emplace_back(arm, reward);
  }
  round_count_ += 1;
  if (cfg_.retrain.due(round_count_)) {
    UserLearnerState& st = users_[user];
    for (std::size_t epoch = 0; epoch < cfg_.refit_epochs; ++epoch) {
      for (const auto& [x, r] : st.history) {
        GradientVector g =
            loss_and_grad(st.params, x, adjusted_target(x, r)).second;
        apply_step(st.params, g, st.opt, cfg_.optimizer, cfg_.refit_lr);
      }
    }
  }
  timing_.user_s += now_s() - t0;
}

void McnbPolicy::restore(MetaLearnerState meta,
                         std::vector<UserLearnerState> users,
                         std::size_t round_count, bool cold_started) {
  if (users.size() != users_.size()) {
    throw DimensionError("restore users", users_.size(), users.size());
  }
  meta_ = std::move(meta);
  users_ = std::move(users);
  round_count_ = round_count;
  cold_started_ = cold_started;
}

// --- NeuUCB baseline ---

NeuUcbPolicy::NeuUcbPolicy(Mode mode, const PolicyConfig& cfg, double alpha,
                           double lambda, std::size_t n_users,
                           std::uint64_t init_seed)
    : mode_(mode), cfg_(cfg), alpha_(alpha), lambda_(lambda) {
  cfg_.validate();
  if (n_users == 0) throw ConfigError("n_users", "must be positive");
  if (alpha_ < 0.0) throw ConfigError("alpha", "must be >= 0");
  if (!(lambda_ > 0.0)) throw ConfigError("lambda", "must be > 0");
  const std::size_t count = mode_ == Mode::one ? 1 : n_users;
  learners_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    learners_[i].params = init_params(cfg_.shape, derive_seed(init_seed, {i}));
    learners_[i].init = learners_[i].params;
    learners_[i].design.assign(cfg_.shape.param_count(), lambda_);
  }
}

double NeuUcbPolicy::adjusted_target(const Learner& ln, const ArmContext& x,
                                     double reward) const {
  if (cfg_.center_at_init) return reward + forward(ln.init, x);
  return reward;
}

NeuUcbPolicy::Learner& NeuUcbPolicy::learner_for(std::size_t user) {
  if (mode_ == Mode::one) return learners_[0];
  if (user >= learners_.size()) {
    throw Error("unknown_user", "no user " + std::to_string(user));
  }
  return learners_[user];
}

void NeuUcbPolicy::cold_start(Environment& env, Rng& rng) {
  if (cold_started_) {
    throw Error("already_cold_started", "cold start may only run once");
  }
  for (std::size_t u = 0; u < env.n_users(); ++u) {
    auto [x, r] = env.cold_item(u, rng);
    learner_for(u).history.emplace_back(std::move(x), r);
  }
  cold_started_ = true;
}

ArmDecision NeuUcbPolicy::select_arm(std::size_t user,
                                     const std::vector<ArmContext>& arms,
                                     Rng&) {
  if (!cold_started_) {
    throw Error("cold_start_required", "select_arm before cold start");
  }
  if (arms.empty()) {
    throw Error("invalid_argument", "select_arm needs at least one arm");
  }
  timing_ = {};
  Learner& ln = learner_for(user);
  const double m = static_cast<double>(cfg_.shape.width);
  ArmDecision decision;
  decision.scores.resize(arms.size());
  for (std::size_t i = 0; i < arms.size(); ++i) {
    Evaluation ev = value_and_grad(ln.params, arms[i]);
    double quad = 0.0;
    for (std::size_t j = 0; j < ev.grad.values.size(); ++j) {
      quad += ev.grad.values[j] * ev.grad.values[j] / ln.design[j];
    }
    ArmScore& s = decision.scores[i];
    s.exploit = ev.value;
    if (cfg_.center_at_init) s.exploit -= forward(ln.init, arms[i]);
    s.user_bonus_s = alpha_ * std::sqrt(quad / m);
    s.total = s.exploit + s.user_bonus_s;
  }
  decision.chosen_index = argmax_lowest(decision.scores);
  return decision;
}

void NeuUcbPolicy::update(std::size_t user, const ArmContext& arm,
                          double reward, Rng&) {
  if (!(reward >= 0.0 && reward <= 1.0)) {
    throw Error("invalid_reward",
                "reward " + std::to_string(reward) + " outside [0, 1]");
  }
  const double t0 = now_s();
  Learner& ln = learner_for(user);
  const double m = static_cast<double>(cfg_.shape.width);
  // design accumulates the pre-step gradient of the chosen arm
  Evaluation ev = value_and_grad(ln.params, arm);
  for (std::size_t j = 0; j < ln.design.size(); ++j) {
    ln.design[j] += ev.grad.values[j] * ev.grad.values[j] / m;
  }
  const double resid = ev.value - adjusted_target(ln, arm, reward);
  GradientVector g = std::move(ev.grad);
  for (double& v : g.values) v *= resid;
  OptimizerState scratch;
  apply_step(ln.params, g, scratch, OptimizerMode::sgd, cfg_.lr_user);
  ln.history.emplace_back(arm, reward);
  round_count_ += 1;
  if (cfg_.retrain.due(round_count_)) {
    for (std::size_t epoch = 0; epoch < cfg_.refit_epochs; ++epoch) {
      for (const auto& [x, r] : ln.history) {
        GradientVector gr =
            loss_and_grad(ln.params, x, adjusted_target(ln, x, r)).second;
        apply_step(ln.params, gr, ln.opt, cfg_.optimizer, cfg_.refit_lr);
      }
    }
  }
  timing_.user_s += now_s() - t0;
}

// --- uniform random ---

ArmDecision UniformRandomPolicy::select_arm(std::size_t,
                                            const std::vector<ArmContext>& arms,
                                            Rng& rng) {
  if (arms.empty()) {
    throw Error("invalid_argument", "select_arm needs at least one arm");
  }
  ArmDecision decision;
  decision.scores.resize(arms.size());
  decision.chosen_index = rng.uniform_index(arms.size());
  return decision;
}

std::unique_ptr<Policy> make_policy(const std::string& id,
                                    const PolicyConfig& cfg,
                                    std::size_t n_users,
                                    std::uint64_t init_seed, double alpha,
                                    double lambda, Exec exec) {
  if (id == "mcnb") {
    return std::make_unique<McnbPolicy>(cfg, n_users, init_seed, exec);
  }
  if (id == "neuucb-one") {
    return std::make_unique<NeuUcbPolicy>(NeuUcbPolicy::Mode::one, cfg, alpha,
                                          lambda, n_users, init_seed);
  }
  if (id == "neuucb-ind") {
    return std::make_unique<NeuUcbPolicy>(NeuUcbPolicy::Mode::ind, cfg, alpha,
                                          lambda, n_users, init_seed);
  }
  if (id == "uniform-random") {
    return std::make_unique<UniformRandomPolicy>();
  }
  throw ConfigError("policy", "unknown policy id '" + id + "'");
}

}  // namespace mcnb
