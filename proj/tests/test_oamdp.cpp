#include <cmath>
#include <random>

#include "doctest.h"
#include "pooamdp/hsvi.hpp"
#include "pooamdp/oamdp.hpp"

using namespace pooamdp;

namespace {

// Layered 6-state, 2-action MDP (0 -> {1,2} -> {3,4} -> 5, 5 terminal), so
// every policy absorbs within three steps and a horizon-5 enumeration is
// exact. Transition probabilities and observer rewards are drawn from `rng`.
Mdp random_layer_mdp(std::mt19937_64& rng, double gamma) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  std::uniform_real_distribution<double> rew(-1.0, 0.0);
  Mdp m(6, 2, gamma, 0);
  auto layer_edges = [&](int s, const std::vector<int>& nexts) {
    for (int a = 0; a < 2; ++a) {
      std::vector<double> w;
      double total = 0.0;
      for (size_t k = 0; k < nexts.size(); ++k) {
        w.push_back(unif(rng));
        total += w.back();
      }
      for (size_t k = 0; k < nexts.size(); ++k)
        m.add_transition(s, a, nexts[k], w[k] / total, rew(rng));
    }
  };
  layer_edges(0, {1, 2});
  layer_edges(1, {3, 4});
  layer_edges(2, {3, 4});
  layer_edges(3, {5});
  layer_edges(4, {5});
  m.set_terminal(5);
  m.finalize();
  return m;
}

Oamdp random_oamdp(uint64_t seed, int num_types) {
  std::mt19937_64 rng(seed);
  Oamdp o;
  o.base = random_layer_mdp(rng, 0.9);
  for (int t = 0; t < num_types; ++t)
    o.per_type.push_back(random_layer_mdp(rng, 0.9));
  // Penalize belief mass on type 0.
  o.agent_reward = [](int, int, const std::vector<double>& beta) {
    return -beta[0];
  };
  o.agent_reward_min = -1.0;
  o.agent_reward_max = 0.0;
  o.tau = 0.5;
  o.vi_epsilon = 1e-13;
  return o;
}

}  // namespace

TEST_CASE("validation rejects malformed models") {
  Oamdp o = random_oamdp(1, 2);
  CHECK_NOTHROW(o.validate());

  Oamdp no_types = o;
  no_types.per_type.clear();
  CHECK_THROWS_AS(no_types.validate(), std::invalid_argument);

  Oamdp shape = o;
  shape.per_type[0] = Mdp(3, 2, 0.9, 0);
  CHECK_THROWS_AS(shape.validate(), std::invalid_argument);

  Oamdp gamma = o;
  {
    std::mt19937_64 rng(7);
    gamma.per_type[0] = random_layer_mdp(rng, 0.8);
  }
  CHECK_THROWS_AS(gamma.validate(), std::invalid_argument);

  Oamdp no_reward = o;
  no_reward.agent_reward = nullptr;
  CHECK_THROWS_AS(no_reward.validate(), std::invalid_argument);

  Oamdp bad_prior = o;
  bad_prior.type_prior = {0.7, 0.7};
  CHECK_THROWS_AS(bad_prior.validate(), std::invalid_argument);
  bad_prior.type_prior = {1.0};
  CHECK_THROWS_AS(bad_prior.validate(), std::invalid_argument);
}

TEST_CASE("conversion builds the product construction") {
  Oamdp o = random_oamdp(2, 3);
  o.type_prior = {0.5, 0.3, 0.2};
  PoOamdp p = convert(o);

  const int S = o.base.num_states();
  CHECK(p.base.num_states() == 4 * S);  // 3 types + the true-dynamics block
  CHECK(p.base.num_actions() == 2);
  CHECK(p.num_targets == 4);
  CHECK(p.criterion == Criterion::custom);
  CHECK(p.base.initial_state() == 3 * S + 0);  // true block

  // Type blocks copy the per-type dynamics and observer rewards.
  for (int t = 0; t < 3; ++t) {
    auto orig = o.per_type[static_cast<size_t>(t)].outcomes(0, 1);
    auto copy = p.base.outcomes(t * S + 0, 1);
    REQUIRE(copy.size() == orig.size());
    for (size_t k = 0; k < orig.size(); ++k) {
      CHECK(copy[k].next == t * S + orig[k].next);
      CHECK(copy[k].prob == orig[k].prob);
      CHECK(copy[k].reward == orig[k].reward);
    }
    CHECK(p.base.is_terminal(t * S + 5));
  }
  // True block: base dynamics with a flat -1 step reward.
  for (const auto& out : p.base.outcomes(3 * S + 0, 0)) {
    CHECK(out.reward == -1.0);
    CHECK(out.next / S == 3);
  }

  // Identity observations on the position within the block.
  for (int s2 : {0, S + 2, 3 * S + 4}) {
    const auto& row = p.obs_row(0, s2);
    REQUIRE(row.size() == 1);
    CHECK(row[0].first == s2 % S);
    CHECK(row[0].second == 1.0);
  }

  // Initial type belief: the prior over type blocks at the initial position.
  REQUIRE(p.initial_belief.probs.size() == 3);
  for (int t = 0; t < 3; ++t) {
    CHECK(p.initial_belief.probs[static_cast<size_t>(t)].first == t * S);
    CHECK(p.initial_belief.probs[static_cast<size_t>(t)].second ==
          doctest::Approx(o.type_prior[static_cast<size_t>(t)]));
  }

  // The fake block never carries belief mass.
  ObserverModel m = build_observer_model(p);
  TargetBelief beta = target_belief(p, m, p.initial_belief);
  REQUIRE(beta.probs.size() == 4);
  CHECK(beta.probs[3] == 0.0);
  CHECK(beta.probs[0] + beta.probs[1] + beta.probs[2] ==
        doctest::Approx(1.0).epsilon(1e-12));

  // The adapter evaluates the original agent reward on the type marginal.
  TargetBelief dummy;
  CHECK(p.custom_reward(3 * S + 0, beta, 0, 0, dummy) ==
        doctest::Approx(-beta.probs[0]).epsilon(1e-12));
}

TEST_CASE("single-type model collapses to a constant belief") {
  Oamdp o = random_oamdp(3, 1);
  // With one type the belief is always the point mass, so the agent reward is
  // -1 on every non-terminal step and the value is a pure discounted count.
  const double gamma = o.base.gamma();
  const double expected = -(1.0 + gamma + gamma * gamma);

  CHECK(oamdp_history_value(o, 8) == doctest::Approx(expected).epsilon(1e-9));

  PoOamdp p = convert(o);
  ObserverModel m = build_observer_model(p);
  BeliefMdp bm(p, m);
  HsviConfig config;
  config.epsilon = 1e-6;
  SolveResult result = solve(bm, config);
  CHECK_FALSE(result.timed_out);
  InfoState i0 = bm.initial_info_state();
  CHECK(result.lower.value(p, i0) == doctest::Approx(expected).epsilon(1e-5));
  CHECK(result.upper.value(p, i0) == doctest::Approx(expected).epsilon(1e-5));
}

TEST_CASE("converted problem and history enumeration agree") {
  for (uint64_t seed : {11u, 12u, 13u, 14u, 15u, 16u, 17u, 18u}) {
    CAPTURE(seed);
    Oamdp o = random_oamdp(seed, 2 + static_cast<int>(seed % 2));
    const double oracle = oamdp_history_value(o, 6);
    // Horizon 6 is already exact: every trajectory absorbs by depth 3.
    CHECK(oamdp_history_value(o, 4) == doctest::Approx(oracle).epsilon(1e-12));

    PoOamdp p = convert(o);
    ObserverModel m = build_observer_model(p);
    BeliefMdp bm(p, m);
    HsviConfig config;
    config.epsilon = 1e-6;
    SolveResult result = solve(bm, config);
    CHECK_FALSE(result.timed_out);
    InfoState i0 = bm.initial_info_state();
    CHECK(result.lower.value(p, i0) <= oracle + 1e-6);
    CHECK(result.upper.value(p, i0) >= oracle - 1e-6);
  }
}

TEST_CASE("non-uniform prior shifts the initial belief and the value") {
  Oamdp o = random_oamdp(21, 2);
  Oamdp skewed = o;
  skewed.type_prior = {0.99, 0.01};
  // Penalty is -beta[0]: nearly certain type 0 must cost more than uniform.
  CHECK(oamdp_history_value(skewed, 6) < oamdp_history_value(o, 6));

  PoOamdp p = convert(skewed);
  CHECK(p.initial_belief.probs[0].second == doctest::Approx(0.99));
}
