#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "pooamdp/hsvi.hpp"
#include "pooamdp/maze.hpp"
#include "pooamdp/sim.hpp"

#include <json.hpp>

using namespace pooamdp;

namespace {

PoOamdp toy_problem(Criterion c = Criterion::legibility, double p_obs = 1.0) {
  std::string header = "criterion = " + to_string(c) +
                       "\nactual_goal = 0\np_obs = " + std::to_string(p_obs) +
                       "\ngamma = 0.9\n\n";
  std::string rows = "1~s~2\n";
  return build_problem(parse_grid(header + rows));
}

PolicyFn observer_policy() {
  return [](BeliefMdp& bm, const InfoState& i, std::mt19937_64& rng) {
    const auto& row =
        bm.model().pi_obs.probs[static_cast<size_t>(i.s)];
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double acc = 0.0;
    for (size_t a = 0; a < row.size(); ++a) {
      acc += row[a];
      if (u < acc) return static_cast<int>(a);
    }
    return static_cast<int>(row.size()) - 1;
  };
}

std::string csv_of(const TrajectoryRecord& r) {
  std::ostringstream out;
  export_trajectory_csv(r, out);
  return out.str();
}

}  // namespace

TEST_CASE("same seed reproduces the trajectory exactly") {
  PoOamdp p = toy_problem(Criterion::legibility, 0.5);
  ObserverModel m = build_observer_model(p);
  BeliefMdp bm(p, m);
  PolicyFn pi = observer_policy();
  TrajectoryRecord a = simulate(bm, pi, 42, 50);
  TrajectoryRecord b = simulate(bm, pi, 42, 50);
  CHECK(csv_of(a) == csv_of(b));
  CHECK(a.final_state == b.final_state);
  CHECK(a.terminated == b.terminated);

  // A different seed gives a different stochastic trajectory (with near
  // certainty on this problem).
  bool any_diff = false;
  for (uint64_t s = 43; s < 48 && !any_diff; ++s)
    any_diff = csv_of(simulate(bm, pi, s, 50)) != csv_of(a);
  CHECK(any_diff);
}

TEST_CASE("substream seeds are deterministic and spread out") {
  CHECK(substream_seed(7, 0) == substream_seed(7, 0));
  std::set<uint64_t> seen;
  for (uint64_t k = 0; k < 64; ++k) seen.insert(substream_seed(7, k));
  CHECK(seen.size() == 64);
  CHECK(substream_seed(7, 3) != substream_seed(8, 3));
}

TEST_CASE("logged beliefs and rewards are filter-consistent") {
  PoOamdp p = toy_problem(Criterion::legibility, 0.5);
  ObserverModel m = build_observer_model(p);
  BeliefMdp bm(p, m);
  TrajectoryRecord r = simulate(bm, observer_policy(), 5, 60);
  REQUIRE(r.steps.size() >= 2);

  for (size_t k = 0; k + 1 < r.steps.size(); ++k) {
    const auto& step = r.steps[k];
    const auto& next = r.steps[k + 1];
    // Re-run the filter on the logged observation.
    Belief b2 = filter_step(p, m, step.belief, step.observation);
    REQUIRE(b2.probs.size() == next.belief.probs.size());
    for (size_t j = 0; j < b2.probs.size(); ++j) {
      CHECK(b2.probs[j].first == next.belief.probs[j].first);
      CHECK(b2.probs[j].second ==
            doctest::Approx(next.belief.probs[j].second).epsilon(1e-12));
    }
    // Recompute the criterion reward from the logged pieces.
    TargetBelief beta = target_belief(p, m, step.belief);
    TargetBelief beta_next = target_belief(p, m, next.belief);
    const double expect = criterion_reward(p, step.state, beta, step.action,
                                           next.state, beta_next);
    CHECK(step.r_criterion == doctest::Approx(expect).epsilon(1e-12));
    // r_obs matches the base MDP's transition reward.
    CHECK(step.r_obs ==
          doctest::Approx(p.base.reward(step.state, step.action, next.state)));
  }
}

TEST_CASE("terminal stops the rollout; horizon cap flags truncation") {
  PoOamdp p = toy_problem();
  ObserverModel m = build_observer_model(p);
  BeliefMdp bm(p, m);

  // Greedy HSVI policy reaches the goal.
  SolveResult solved = solve(bm, HsviConfig{});
  HsviPolicy hp = extract_policy(solved);
  PolicyFn pi = [&hp](BeliefMdp& b, const InfoState& i, std::mt19937_64&) {
    return hp.action(b, i);
  };
  TrajectoryRecord r = simulate(bm, pi, 1, 100);
  CHECK(r.terminated);
  CHECK_FALSE(r.horizon_cap_hit);
  CHECK(p.base.is_terminal(r.final_state));

  // A wall-banging policy never terminates.
  PolicyFn stuck = [](BeliefMdp&, const InfoState&, std::mt19937_64&) {
    return static_cast<int>(kUp);
  };
  TrajectoryRecord loop = simulate(bm, stuck, 1, 7);
  CHECK_FALSE(loop.terminated);
  CHECK(loop.horizon_cap_hit);
  CHECK(loop.steps.size() == 7);
}

TEST_CASE("evaluate reports exact statistics for deterministic rollouts") {
  PoOamdp p = toy_problem();  // p_obs = 1: everything is deterministic
  ObserverModel m = build_observer_model(p);
  BeliefMdp bm(p, m);
  SolveResult solved = solve(bm, HsviConfig{});
  HsviPolicy hp = extract_policy(solved);
  PolicyFn pi = [&hp](BeliefMdp& b, const InfoState& i, std::mt19937_64&) {
    return hp.action(b, i);
  };

  EvalReport report = evaluate(bm, pi, 8, 123);
  CHECK(report.n_trajectories == 8);
  CHECK(report.seed == 123);
  CHECK(report.std_error_criterion <= 1e-12);
  CHECK(report.std_error_observer <= 1e-12);

  // The mean equals the single-trajectory discounted return.
  TrajectoryRecord r = simulate(bm, pi, substream_seed(123, 0));
  double ret_c = 0.0, disc = 1.0;
  for (const auto& step : r.steps) {
    ret_c += disc * step.r_criterion;
    disc *= p.base.gamma();
  }
  CHECK(report.mean_return_criterion == doctest::Approx(ret_c).epsilon(1e-12));
  // And it agrees with the solver's converged value bracket.
  InfoState i0 = bm.initial_info_state();
  CHECK(report.mean_return_criterion >= solved.lower.value(p, i0) - 1e-6);
  CHECK(report.mean_return_criterion <= solved.upper.value(p, i0) + 1e-6);

  CHECK_THROWS_AS(evaluate(bm, pi, 0, 1), std::invalid_argument);
}

TEST_CASE("Monte Carlo mean matches an analytic return") {
  // Forced one-step problem: the return is the first-step criterion reward.
  PoOamdp p;
  p.base = Mdp(2, 1, 0.9, 0);
  p.base.add_transition(0, 0, 1, 1.0, -0.25);
  p.base.set_terminal(1);
  p.base.finalize();
  p.num_observations = 1;
  p.obs_kernel.assign(2, {{0, 1.0}});
  p.num_targets = 1;
  p.target_map = [](int, int, int) { return 0; };
  p.criterion = Criterion::custom;
  p.custom_reward = [](int, const TargetBelief&, int, int, const TargetBelief&) {
    return -0.5;
  };
  p.custom_reward_min = -0.5;
  p.custom_reward_max = 0.0;
  p.initial_belief = Belief::make({{0, 1.0}});
  ObserverModel m = build_observer_model(p);
  BeliefMdp bm(p, m);
  PolicyFn pi = [](BeliefMdp&, const InfoState&, std::mt19937_64&) { return 0; };
  EvalReport report = evaluate(bm, pi, 16, 9);
  CHECK(report.mean_return_criterion == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(report.mean_return_observer == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(report.std_error_criterion == 0.0);
}

TEST_CASE("exports round-trip through text at full precision") {
  PoOamdp p = toy_problem(Criterion::legibility, 0.5);
  ObserverModel m = build_observer_model(p);
  BeliefMdp bm(p, m);
  TrajectoryRecord r = simulate(bm, observer_policy(), 77, 40);
  REQUIRE(!r.steps.empty());

  // CSV: header plus one line per step; belief entries parse back exactly.
  std::istringstream csv(csv_of(r));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t,state,action,observation,belief,target_belief,r_criterion,r_obs");
  size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == r.steps.size());

  // JSON: parse back and compare fields bit-for-bit.
  std::ostringstream js;
  export_trajectory_json(r, js);
  auto doc = nlohmann::json::parse(js.str());
  REQUIRE(doc["steps"].size() == r.steps.size());
  for (size_t k = 0; k < r.steps.size(); ++k) {
    const auto& step = r.steps[k];
    const auto& jstep = doc["steps"][k];
    CHECK(jstep["t"].get<int>() == step.t);
    CHECK(jstep["state"].get<int>() == step.state);
    CHECK(jstep["action"].get<int>() == step.action);
    CHECK(jstep["observation"].get<int>() == step.observation);
    CHECK(jstep["r_criterion"].get<double>() == step.r_criterion);
    CHECK(jstep["r_obs"].get<double>() == step.r_obs);
    REQUIRE(jstep["belief"].size() == step.belief.probs.size());
    for (size_t j = 0; j < step.belief.probs.size(); ++j) {
      CHECK(jstep["belief"][j][0].get<int>() == step.belief.probs[j].first);
      CHECK(jstep["belief"][j][1].get<double>() == step.belief.probs[j].second);
    }
  }
  CHECK(doc["final_state"].get<int>() == r.final_state);
  CHECK(doc["terminated"].get<bool>() == r.terminated);

  // Eval report JSON parses and carries exact doubles.
  EvalReport report = evaluate(bm, observer_policy(), 4, 7, 40);
  auto ej = nlohmann::json::parse(eval_report_json(report));
  CHECK(ej["mean_return_criterion"].get<double>() ==
        report.mean_return_criterion);
  CHECK(ej["n_trajectories"].get<int>() == 4);
  CHECK(ej["seed"].get<uint64_t>() == 7);
}
