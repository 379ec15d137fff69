#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <vector>

#include "doctest.h"
#include "mcnb/environment.hpp"
#include "mcnb/errors.hpp"

using namespace mcnb;

namespace {

SyntheticEnvSpec default_spec() {
  SyntheticEnvSpec s;
  s.n_users = 12;
  s.dim = 6;
  s.arms_per_round = 5;
  s.n_groups = 3;
  s.reward_family = RewardFamily::linear;
  s.noise_std = 0.05;
  s.gamma_gap = 0.4;
  s.seed = 7;
  return s;
}

double norm(const ArmContext& x) {
  double n2 = 0.0;
  for (double v : x) n2 += v * v;
  return std::sqrt(n2);
}

// brute-force check of the two cluster properties on one round: users
// in one cluster share the expected reward exactly, users in different
// clusters differ by at least the configured gap, and the stored
// cluster of the serving user is exactly the equal-reward set
void verify_round(const SyntheticEnv& env, const Round& round) {
  const std::size_t n = env.n_users();
  const double gap = env.spec().gamma_gap;
  for (std::size_t a = 0; a < round.arms.size(); ++a) {
    const ArmContext& arm = round.arms[a];
    std::vector<double> h(n);
    for (std::size_t u = 0; u < n; ++u) h[u] = env.expected_reward(u, arm);
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        if (env.group_of(u, arm) == env.group_of(v, arm)) {
          CHECK(h[u] == h[v]);
        } else {
          CHECK(std::fabs(h[u] - h[v]) >= gap - 1e-12);
        }
      }
    }
    std::vector<std::size_t> equal_set;
    for (std::size_t u = 0; u < n; ++u) {
      if (h[u] == h[round.user]) equal_set.push_back(u);
    }
    CHECK(equal_set == round.true_clusters[a]);
    CHECK(round.expected_rewards[a] == h[round.user]);
  }
}

std::string write_temp(const std::string& name, const std::string& body) {
  const std::string path = "/tmp/mcnb_env_" + name;
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("synthetic spec validation names the bad field") {
  SyntheticEnvSpec s = default_spec();
  s.n_groups = 0;
  CHECK_THROWS_WITH_AS(SyntheticEnv{s}, doctest::Contains("n_groups"),
                       ConfigError);
  s = default_spec();
  s.gamma_gap = 0.0;
  CHECK_THROWS_WITH_AS(SyntheticEnv{s}, doctest::Contains("gamma_gap"),
                       ConfigError);
  s = default_spec();
  s.noise_std = -0.1;
  CHECK_THROWS_WITH_AS(SyntheticEnv{s}, doctest::Contains("noise_std"),
                       ConfigError);
  s = default_spec();
  s.n_groups = 13;  // > n_users
  CHECK_THROWS_AS(SyntheticEnv{s}, ConfigError);
}

TEST_CASE("round generation basics") {
  SyntheticEnv env(default_spec());
  Rng rng(100);
  for (std::size_t t = 0; t < 20; ++t) {
    Round round = env.gen_round(t, rng);
    CHECK(round.user < env.n_users());
    REQUIRE(round.arms.size() == 5);
    for (const auto& arm : round.arms) {
      CHECK(std::fabs(norm(arm) - 1.0) < 1e-12);
    }
    for (double h : round.expected_rewards) {
      CHECK(h >= 0.0);
      CHECK(h <= 1.0);
    }
    double best = 0.0;
    for (double h : round.expected_rewards) best = std::max(best, h);
    for (double h : round.expected_rewards) CHECK(best >= h);
  }
}

TEST_CASE("round generation is deterministic per rng seed") {
  SyntheticEnv a(default_spec()), b(default_spec());
  Rng ra(9), rb(9);
  for (std::size_t t = 0; t < 5; ++t) {
    Round x = a.gen_round(t, ra), y = b.gen_round(t, rb);
    CHECK(x.user == y.user);
    CHECK(x.arms == y.arms);
    CHECK(x.expected_rewards == y.expected_rewards);
  }
}

TEST_CASE("pairwise verifier holds on every family") {
  for (RewardFamily fam : {RewardFamily::linear, RewardFamily::quadratic,
                           RewardFamily::cosine}) {
    SyntheticEnvSpec s = default_spec();
    s.reward_family = fam;
    SyntheticEnv env(s);
    Rng rng(55);
    for (std::size_t t = 0; t < 10; ++t) {
      verify_round(env, env.gen_round(t, rng));
    }
  }
}

TEST_CASE("single group puts every user in one cluster") {
  SyntheticEnvSpec s = default_spec();
  s.n_groups = 1;
  SyntheticEnv env(s);
  Rng rng(3);
  Round round = env.gen_round(0, rng);
  for (std::size_t a = 0; a < round.arms.size(); ++a) {
    CHECK(round.true_clusters[a].size() == env.n_users());
    for (std::size_t u = 0; u < env.n_users(); ++u) {
      CHECK(env.expected_reward(u, round.arms[a]) ==
            round.expected_rewards[a]);
    }
  }
}

TEST_CASE("zero noise returns the expected reward exactly") {
  SyntheticEnvSpec s = default_spec();
  s.noise_std = 0.0;
  SyntheticEnv env(s);
  Rng rng(4);
  Round round = env.gen_round(0, rng);
  for (std::size_t a = 0; a < round.arms.size(); ++a) {
    CHECK(env.sample_reward(round, a, rng) == round.expected_rewards[a]);
  }
}

TEST_CASE("noisy samples average to the expected reward") {
  SyntheticEnvSpec s = default_spec();
  s.noise_std = 0.1;
  SyntheticEnv env(s);
  Rng rng(5);
  // group-1 users sit at the middle level, far from the clamp
  std::size_t user = 1;
  ArmContext arm;
  Round round = env.gen_round(0, rng);
  for (const auto& cand : round.arms) {
    if (cand[0] >= 0.0) arm = cand;
  }
  REQUIRE(!arm.empty());
  const double mean = env.expected_reward(user, arm);
  CHECK(mean > 0.4);
  CHECK(mean < 0.6);
  double acc = 0.0;
  for (int i = 0; i < 10000; ++i) acc += env.sample_reward(user, arm, rng);
  acc /= 10000.0;
  CHECK(std::fabs(acc - mean) < 3.0 * 0.1 / 100.0);
}

TEST_CASE("samples always stay inside the unit interval") {
  SyntheticEnvSpec s = default_spec();
  s.noise_std = 0.8;
  SyntheticEnv env(s);
  Rng rng(6);
  Round round = env.gen_round(0, rng);
  for (int i = 0; i < 500; ++i) {
    const double r = env.sample_reward(round, i % round.arms.size(), rng);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
}

TEST_CASE("feasible specs never clip the reward surface") {
  SyntheticEnv env(default_spec());
  Rng rng(8);
  for (std::size_t t = 0; t < 10; ++t) {
    Round round = env.gen_round(t, rng);
    for (const auto& arm : round.arms) {
      for (std::size_t u = 0; u < env.n_users(); ++u) {
        const double h = env.expected_reward(u, arm);
        CHECK(h >= 0.01 - 1e-12);
        CHECK(h <= 0.99 + 1e-12);
      }
    }
  }
}

TEST_CASE("quadratic family matches its documented closed form") {
  SyntheticEnvSpec s = default_spec();
  s.reward_family = RewardFamily::quadratic;
  SyntheticEnv env(s);
  Rng rng(12);
  Round round = env.gen_round(0, rng);
  for (const auto& arm : round.arms) {
    const int region = arm[0] >= 0.0 ? 0 : 1;
    for (std::size_t u = 0; u < env.n_users(); ++u) {
      const std::size_t g = env.group_of(u, arm);
      double z = 0.0;
      const auto& w = env.direction(region, g);
      for (std::size_t j = 0; j < arm.size(); ++j) z += w[j] * arm[j];
      const double h =
          std::min(1.0, std::max(0.0, env.levels()[g] +
                                          env.amp() * (z * z - 0.5)));
      CHECK(env.expected_reward(u, arm) == doctest::Approx(h).epsilon(1e-14));
    }
  }
}

TEST_CASE("infeasible separation exhausts resampling with advice") {
  SyntheticEnvSpec s = default_spec();
  s.n_groups = 4;  // amp < 0 at gamma 0.4
  SyntheticEnv env(s);
  Rng rng(13);
  CHECK_THROWS_WITH_AS(env.gen_round(0, rng),
                       doctest::Contains("reduce gamma_gap or n_groups"),
                       GapCertificationError);
}

TEST_CASE("expected_reward validates its arm") {
  SyntheticEnv env(default_spec());
  CHECK_THROWS_AS(env.expected_reward(0, ArmContext{1.0, 0.0}),
                  DimensionError);
  ArmContext big(6, 0.0);
  big[0] = 2.0;
  CHECK_THROWS_AS(env.expected_reward(0, big), Error);
}

TEST_CASE("classification arms hand example") {
  auto arms = build_classification_arms({0.6, 0.8}, 3);
  REQUIRE(arms.size() == 3);
  CHECK(arms[0] == ArmContext{0.6, 0.8, 0.0, 0.0, 0.0, 0.0});
  CHECK(arms[1] == ArmContext{0.0, 0.0, 0.6, 0.8, 0.0, 0.0});
  CHECK(arms[2] == ArmContext{0.0, 0.0, 0.0, 0.0, 0.6, 0.8});
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::fabs(norm(arms[i]) - 1.0) < 1e-12);
    for (std::size_t j = i + 1; j < 3; ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < arms[i].size(); ++k) {
        d += arms[i][k] * arms[j][k];
      }
      CHECK(d == 0.0);
    }
  }
  CHECK_THROWS_AS(build_classification_arms({1.0}, 0), Error);
}

TEST_CASE("classification csv loading and validation") {
  const std::string good = write_temp(
      "good.csv", "label,f1,f2\n0,0.6,0.8\n1,1,0\n2,3,4\n0,0,2\n");
  ClassificationData data = load_classification_csv(good);
  REQUIRE(data.labels.size() == 4);
  CHECK(data.n_classes == 3);
  CHECK(data.features[0][0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(data.features[2][0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(data.features[2][1] == doctest::Approx(0.8).epsilon(1e-12));
  for (const auto& f : data.features) {
    CHECK(std::fabs(norm(f) - 1.0) < 1e-12);
  }

  CHECK_THROWS_AS(load_classification_csv("/tmp/mcnb_missing_file.csv"),
                  IoError);
  CHECK_THROWS_WITH_AS(
      load_classification_csv(
          write_temp("nohdr.csv", "0,0.6,0.8\n1,1,0\n")),
      doctest::Contains("header"), DataFormatError);
  CHECK_THROWS_WITH_AS(
      load_classification_csv(
          write_temp("badnum.csv", "label,f1,f2\n0,x,0.8\n")),
      doctest::Contains("not a number"), DataFormatError);
  CHECK_THROWS_WITH_AS(
      load_classification_csv(
          write_temp("badcols.csv", "label,f1,f2\n0,0.6\n")),
      doctest::Contains("columns"), DataFormatError);
  CHECK_THROWS_AS(load_classification_csv(
                      write_temp("neg.csv", "label,f1,f2\n-1,0.6,0.8\n")),
                  DataFormatError);
  CHECK_THROWS_AS(load_classification_csv(
                      write_temp("zero.csv", "label,f1,f2\n0,0,0\n")),
                  DataFormatError);
}

TEST_CASE("loader round-trips within float tolerance") {
  const std::string first = write_temp(
      "rt1.csv", "label,f1,f2\n0,0.6,0.8\n1,-0.28,0.96\n2,1,0\n");
  ClassificationData a = load_classification_csv(first);
  std::string body = "label,f1,f2\n";
  char buf[64];
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", a.labels[i],
                  a.features[i][0], a.features[i][1]);
    body += buf;
  }
  ClassificationData b = load_classification_csv(write_temp("rt2.csv", body));
  REQUIRE(b.labels == a.labels);
  for (std::size_t i = 0; i < a.features.size(); ++i) {
    for (std::size_t j = 0; j < a.features[i].size(); ++j) {
      CHECK(std::fabs(a.features[i][j] - b.features[i][j]) < 1e-9);
    }
  }
}

TEST_CASE("classification environment rounds") {
  const std::string path = write_temp(
      "cls.csv",
      "label,f1,f2\n0,0.6,0.8\n1,1,0\n2,0,1\n1,0.8,0.6\n2,0.96,0.28\n");
  ClassificationEnv env(load_classification_csv(path));
  CHECK(env.n_users() == 3);
  CHECK(env.arms_per_round() == 3);
  CHECK(env.context_dim() == 6);
  Rng rng(77);
  for (int t = 0; t < 12; ++t) {
    Round round = env.gen_round(t, rng);
    CHECK(round.user < 3);
    REQUIRE(round.arms.size() == 3);
    for (const auto& arm : round.arms) {
      CHECK(arm.size() == 6);
      CHECK(std::fabs(norm(arm) - 1.0) < 1e-12);
    }
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(round.expected_rewards[i] == (i == round.user ? 1.0 : 0.0));
      CHECK(env.sample_reward(round, i, rng) == round.expected_rewards[i]);
      if (i == round.user) {
        CHECK(round.true_clusters[i] ==
              std::vector<std::size_t>{round.user});
      } else {
        std::vector<std::size_t> rest;
        for (std::size_t v = 0; v < 3; ++v) {
          if (v != i) rest.push_back(v);
        }
        CHECK(round.true_clusters[i] == rest);
      }
    }
  }
}

TEST_CASE("classification cold item carries reward one in the user block") {
  const std::string path =
      write_temp("cold.csv", "label,f1,f2\n0,0.6,0.8\n1,1,0\n");
  ClassificationEnv env(load_classification_csv(path));
  Rng rng(1);
  auto [arm, reward] = env.cold_item(1, rng);
  CHECK(reward == 1.0);
  REQUIRE(arm.size() == 4);
  CHECK(arm[0] == 0.0);
  CHECK(arm[1] == 0.0);
  CHECK(arm[2] == 1.0);
  CHECK(arm[3] == 0.0);
  CHECK_THROWS_AS(env.cold_item(5, rng), Error);
}

TEST_CASE("rating environment rounds") {
  const std::string path = write_temp(
      "rate.csv",
      "user_id,f1,f2,rating\n"
      "0,1,0,5\n0,0,1,2\n0,0.6,0.8,1\n"
      "1,0.8,0.6,4.5\n1,0.28,0.96,3\n"
      "2,1,0,5\n");  // user 2 has no negative: excluded
  RatingData data = load_rating_csv(path);
  REQUIRE(data.user_ids.size() == 6);
  RatingEnv env(std::move(data), 4.0, 3);
  CHECK(env.n_users() == 2);
  CHECK(env.context_dim() == 2);
  CHECK_FALSE(env.has_cluster_truth());
  Rng rng(14);
  for (int t = 0; t < 10; ++t) {
    Round round = env.gen_round(t, rng);
    CHECK(round.user < 2);
    REQUIRE(round.arms.size() == 3);
    int ones = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::fabs(norm(round.arms[i]) - 1.0) < 1e-12);
      if (round.expected_rewards[i] == 1.0) ++ones;
      CHECK(env.sample_reward(round, i, rng) == round.expected_rewards[i]);
      CHECK(round.true_clusters[i].empty());
    }
    CHECK(ones == 1);
  }
}

TEST_CASE("rating environment rejects impossible setups") {
  const std::string allpos = write_temp(
      "allpos.csv", "user_id,f1,f2,rating\n0,1,0,5\n0,0,1,5\n");
  CHECK_THROWS_AS(RatingEnv(load_rating_csv(allpos), 4.0, 3),
                  DataFormatError);
  const std::string ok = write_temp(
      "ok.csv", "user_id,f1,f2,rating\n0,1,0,5\n0,0,1,1\n");
  CHECK_THROWS_AS(RatingEnv(load_rating_csv(ok), 4.0, 1), Error);
}

TEST_CASE("iid uniform environment calibration shape") {
  IidUniformEnv env(10, 4);
  Rng rng(15);
  double max_acc = 0.0;
  const int rounds = 5000;
  for (int t = 0; t < rounds; ++t) {
    Round round = env.gen_round(t, rng);
    REQUIRE(round.arms.size() == 10);
    double best = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(std::fabs(norm(round.arms[i]) - 1.0) < 1e-12);
      CHECK(round.expected_rewards[i] >= 0.0);
      CHECK(round.expected_rewards[i] <= 1.0);
      best = std::max(best, round.expected_rewards[i]);
    }
    max_acc += best;
  }
  // E[max of 10 iid U(0,1)] = 10/11
  CHECK(std::fabs(max_acc / rounds - 10.0 / 11.0) < 0.02);
}
