#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <vector>

#include "doctest.h"
#include "mcnb/environment.hpp"
#include "mcnb/errors.hpp"
#include "mcnb/policy.hpp"
#include "mcnb/serialization.hpp"

using namespace mcnb;

namespace {

PolicyConfig small_config() {
  PolicyConfig cfg;
  cfg.shape = NetworkShape{4, 8, 2};
  cfg.lr_user = 0.01;
  cfg.lr_meta = 0.01;
  return cfg;
}

SyntheticEnvSpec small_env() {
  SyntheticEnvSpec s;
  s.n_users = 4;
  s.dim = 4;
  s.arms_per_round = 3;
  s.n_groups = 2;
  s.noise_std = 0.05;
  s.gamma_gap = 0.3;
  s.seed = 91;
  return s;
}

McnbPolicy warmed_policy(std::size_t rounds) {
  McnbPolicy policy(small_config(), 4, 92);
  SyntheticEnv env(small_env());
  Rng rng(93);
  policy.cold_start(env, rng);
  for (std::size_t t = 1; t <= rounds; ++t) {
    Round round = env.gen_round(t, rng);
    ArmDecision dec = policy.select_arm(round.user, round.arms, rng);
    const double r = env.sample_reward(round, dec.chosen_index, rng);
    policy.update(round.user, round.arms[dec.chosen_index], r, rng);
  }
  return policy;
}

}  // namespace

TEST_CASE("json snapshot round-trips every field bitwise") {
  McnbPolicy policy = warmed_policy(25);
  nlohmann::json doc = policy_state_to_json(policy);
  CHECK(doc.at("format") == "mcnb-state-v1");
  CHECK(doc.at("rounds_seen") == 25);
  CHECK(doc.at("cold_started") == true);

  McnbPolicy fresh(small_config(), 4, 12345);  // different init on purpose
  policy_state_from_json(fresh, doc);

  CHECK(fresh.rounds_seen() == policy.rounds_seen());
  CHECK(fresh.cold_started());
  CHECK(fresh.meta_state().params.values ==
        policy.meta_state().params.values);
  CHECK(fresh.meta_state().init_snapshot.values ==
        policy.meta_state().init_snapshot.values);
  CHECK(fresh.meta_state().opt.m1 == policy.meta_state().opt.m1);
  CHECK(fresh.meta_state().opt.step_count ==
        policy.meta_state().opt.step_count);
  for (std::size_t u = 0; u < 4; ++u) {
    CHECK(fresh.user_state(u).params.values ==
          policy.user_state(u).params.values);
    CHECK(fresh.user_state(u).serve_count == policy.user_state(u).serve_count);
    CHECK(fresh.user_state(u).history == policy.user_state(u).history);
    CHECK(fresh.user_state(u).opt.m2 == policy.user_state(u).opt.m2);
  }
  // text round-trip: nlohmann emits shortest-exact doubles
  nlohmann::json reparsed = nlohmann::json::parse(doc.dump());
  CHECK(reparsed == doc);
}

TEST_CASE("restored policy continues exactly like the original") {
  McnbPolicy policy = warmed_policy(30);
  const std::string path = "/tmp/mcnb_state_test.json";
  save_policy_state(policy, path);

  McnbPolicy resumed(small_config(), 4, 777);
  load_policy_state(resumed, path);

  SyntheticEnv env_a(small_env());
  SyntheticEnv env_b(small_env());
  Rng ra(505), rb(505);
  for (std::size_t t = 31; t <= 50; ++t) {
    Round round_a = env_a.gen_round(t, ra);
    Round round_b = env_b.gen_round(t, rb);
    ArmDecision da = policy.select_arm(round_a.user, round_a.arms, ra);
    ArmDecision db = resumed.select_arm(round_b.user, round_b.arms, rb);
    REQUIRE(da.chosen_index == db.chosen_index);
    const double r = env_a.sample_reward(round_a, da.chosen_index, ra);
    const double r2 = env_b.sample_reward(round_b, db.chosen_index, rb);
    REQUIRE(r == r2);
    policy.update(round_a.user, round_a.arms[da.chosen_index], r, ra);
    resumed.update(round_b.user, round_b.arms[db.chosen_index], r, rb);
  }
  for (std::size_t u = 0; u < 4; ++u) {
    CHECK(policy.user_state(u).params.values ==
          resumed.user_state(u).params.values);
  }
  CHECK(policy.meta_state().params.values ==
        resumed.meta_state().params.values);
  std::remove(path.c_str());
}

TEST_CASE("format and shape guards") {
  McnbPolicy policy = warmed_policy(3);
  nlohmann::json doc = policy_state_to_json(policy);

  SUBCASE("unknown version tag") {
    nlohmann::json bad = doc;
    bad["format"] = "mcnb-state-v999";
    McnbPolicy fresh(small_config(), 4, 1);
    CHECK_THROWS_WITH_AS(policy_state_from_json(fresh, bad),
                         doctest::Contains("format"), DataFormatError);
  }
  SUBCASE("shape mismatch") {
    PolicyConfig other = small_config();
    other.shape.width = 16;
    McnbPolicy fresh(other, 4, 1);
    CHECK_THROWS_WITH_AS(policy_state_from_json(fresh, doc),
                         doctest::Contains("shape"), DataFormatError);
  }
  SUBCASE("user count mismatch") {
    McnbPolicy fresh(small_config(), 5, 1);
    CHECK_THROWS_WITH_AS(policy_state_from_json(fresh, doc),
                         doctest::Contains("users"), DataFormatError);
  }
  SUBCASE("weight array length mismatch") {
    nlohmann::json bad = doc;
    bad["meta"]["params"].push_back(0.0);
    McnbPolicy fresh(small_config(), 4, 1);
    CHECK_THROWS_AS(policy_state_from_json(fresh, bad), DataFormatError);
  }
  SUBCASE("serve count drift") {
    nlohmann::json bad = doc;
    bad["users"][0]["serve_count"] =
        bad["users"][0]["serve_count"].get<std::size_t>() + 1;
    McnbPolicy fresh(small_config(), 4, 1);
    CHECK_THROWS_WITH_AS(policy_state_from_json(fresh, bad),
                         doctest::Contains("serve_count"), DataFormatError);
  }
  SUBCASE("missing file") {
    McnbPolicy fresh(small_config(), 4, 1);
    CHECK_THROWS_AS(load_policy_state(fresh, "/tmp/does_not_exist_mcnb.json"),
                    IoError);
  }
  SUBCASE("garbage file") {
    const std::string path = "/tmp/mcnb_garbage.json";
    {
      std::FILE* f = std::fopen(path.c_str(), "w");
      std::fputs("not json {", f);
      std::fclose(f);
    }
    McnbPolicy fresh(small_config(), 4, 1);
    CHECK_THROWS_AS(load_policy_state(fresh, path), DataFormatError);
    std::remove(path.c_str());
  }
}
