#include "pooamdp/hsvi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace pooamdp {

double BoundTable::value(const PoOamdp& problem, const InfoState& i) const {
  return value(problem, i, make_key(i));
}

double BoundTable::value(const PoOamdp& problem, const InfoState& i,
                         const InfoKey& key) const {
  if (problem.base.is_terminal(i.s)) return 0.0;
  if (auto it = stored.find(key); it != stored.end()) return it->second;
  return init(i);
}

namespace {

// Extremes of R' = R_b + robs_weight * R_obs over non-terminal transitions.
std::pair<double, double> reward_extremes(const PoOamdp& problem) {
  auto [rb_min, rb_max] = criterion_range(problem);
  double robs_min = 0.0, robs_max = 0.0;
  if (problem.robs_weight != 0.0) {
    robs_min = std::numeric_limits<double>::infinity();
    robs_max = -std::numeric_limits<double>::infinity();
    const auto& mdp = problem.base;
    for (int s = 0; s < mdp.num_states(); ++s) {
      if (mdp.is_terminal(s)) continue;
      for (int a = 0; a < mdp.num_actions(); ++a) {
        for (const auto& out : mdp.outcomes(s, a)) {
          robs_min = std::min(robs_min, out.reward);
          robs_max = std::max(robs_max, out.reward);
        }
      }
    }
    if (robs_min > robs_max) robs_min = robs_max = 0.0;
  }
  return {rb_min + problem.robs_weight * robs_min,
          rb_max + problem.robs_weight * robs_max};
}

}  // namespace

std::pair<BoundTable, BoundTable> init_naive(const PoOamdp& problem,
                                             const ObserverModel& /*model*/) {
  const double gamma = problem.base.gamma();
  if (gamma >= 1.0) throw std::invalid_argument("init_naive: requires gamma < 1");
  const auto [r_min, r_max] = reward_extremes(problem);
  const double lo = r_min / (1.0 - gamma);
  const double up = r_max / (1.0 - gamma);
  BoundTable lower{BoundTable::Kind::lower, [lo](const InfoState&) { return lo; }, {}};
  BoundTable upper{BoundTable::Kind::upper, [up](const InfoState&) { return up; }, {}};
  return {std::move(lower), std::move(upper)};
}

std::pair<BoundTable, BoundTable> init_combined(const PoOamdp& problem,
                                                const ObserverModel& model,
                                                HsviConfig::CombinedPolicy policy,
                                                CombinedInitData* data) {
  const auto& mdp = problem.base;
  const double gamma = mdp.gamma();
  auto [rb_min, rb_max] = criterion_range(problem);

  SweepOptions opts;
  opts.epsilon = problem.vi_epsilon;
  for (const auto& [s, p] : problem.initial_belief.probs)
    opts.seed_states.push_back(s);
  opts.seed_states.push_back(mdp.initial_state());

  // R_s = robs_weight * R_obs; stored rewards in `base` are R_obs.
  const double w = problem.robs_weight;
  const RewardFn r_s = [&mdp, w](int s, int a, int s2) {
    return w * mdp.reward(s, a, s2);
  };
  // Counts every decision step, including the one entering a terminal state:
  // the belief-dependent penalty is incurred on that final step too, so the
  // lower bound needs the full discounted step count.
  const RewardFn r_cost_to_go = [](int, int, int) { return 1.0; };

  const ValueTable v_star_robs = value_iteration(mdp, opts);
  StochasticPolicy pi = policy == HsviConfig::CombinedPolicy::pi_obs
                            ? model.pi_obs
                            : greedy_policy(mdp, v_star_robs);

  const ValueTable v_s_pi = policy_evaluation(mdp, pi, &r_s, opts);
  const ValueTable v_cost = policy_evaluation(mdp, pi, &r_cost_to_go, opts);

  // V*_s: optimal value under R_s alone. With w == 0 it is identically 0.
  ValueTable v_s_star(static_cast<size_t>(mdp.num_states()), 0.0);
  if (w != 0.0) {
    v_s_star = v_star_robs;
    for (auto& v : v_s_star) v *= w;
  }

  if (data) {
    data->v_s_pi = v_s_pi;
    data->v_cost_to_go = v_cost;
    data->v_s_star = v_s_star;
    data->r_b_min = rb_min;
    data->r_b_max = rb_max;
  }

  BoundTable lower{BoundTable::Kind::lower,
                   [v_s_pi, v_cost, rb_min](const InfoState& i) {
                     return v_s_pi[static_cast<size_t>(i.s)] +
                            rb_min * v_cost[static_cast<size_t>(i.s)];
                   },
                   {}};
  double up_const = 0.0;
  if (gamma < 1.0) up_const = rb_max / (1.0 - gamma);
  BoundTable upper{BoundTable::Kind::upper,
                   [v_s_star, up_const](const InfoState& i) {
                     return v_s_star[static_cast<size_t>(i.s)] + up_const;
                   },
                   {}};
  return {std::move(lower), std::move(upper)};
}

namespace {

struct Solver {
  BeliefMdp& bm;
  const HsviConfig& config;
  BoundTable lower;
  BoundTable upper;
  std::chrono::steady_clock::time_point start;
  bool timed_out = false;

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }

  // Bellman backup of both bounds at i; clamped so the bracket only tightens.
  void update(const InfoState& i, const InfoKey& key) {
    const auto& problem = bm.problem();
    const double gamma = problem.base.gamma();
    double best_up = -std::numeric_limits<double>::infinity();
    double best_lo = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < problem.base.num_actions(); ++a) {
      double q_up = 0.0, q_lo = 0.0;
      for (const auto& tr : bm.successors(i, a)) {
        const InfoKey sk = make_key(tr.successor);
        q_up += tr.probability *
                (tr.reward + gamma * upper.value(problem, tr.successor, sk));
        q_lo += tr.probability *
                (tr.reward + gamma * lower.value(problem, tr.successor, sk));
      }
      best_up = std::max(best_up, q_up);
      best_lo = std::max(best_lo, q_lo);
    }
    const double old_up = upper.value(problem, i, key);
    const double old_lo = lower.value(problem, i, key);
    upper.stored[key] = std::min(old_up, best_up);
    lower.stored[key] = std::max(old_lo, best_lo);
  }

  void explore(const InfoState& i, int depth) {
    if (timed_out || depth >= config.max_depth) return;
    if (elapsed() > config.timeout_secs) {
      timed_out = true;
      return;
    }
    const auto& problem = bm.problem();
    if (problem.base.is_terminal(i.s)) return;
    const double gamma = problem.base.gamma();
    const InfoKey key = make_key(i);
    const double excess_threshold =
        config.epsilon * std::pow(gamma, -static_cast<double>(depth));
    if (upper.value(problem, i, key) - lower.value(problem, i, key) <
        excess_threshold)
      return;

    update(i, key);

    // Greedy action on the upper bound.
    int best_a = 0;
    double best_q = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < problem.base.num_actions(); ++a) {
      double q = 0.0;
      for (const auto& tr : bm.successors(i, a))
        q += tr.probability *
             (tr.reward + gamma * upper.value(problem, tr.successor));
      if (q > best_q) {
        best_q = q;
        best_a = a;
      }
    }

    // Successor with the largest probability-weighted excess gap.
    const auto& succ = bm.successors(i, best_a);
    const double child_threshold =
        config.epsilon * std::pow(gamma, -static_cast<double>(depth + 1));
    const InfoState* chosen = nullptr;
    double best_excess = -std::numeric_limits<double>::infinity();
    for (const auto& tr : succ) {
      const InfoKey sk = make_key(tr.successor);
      const double excess =
          tr.probability * (upper.value(problem, tr.successor, sk) -
                            lower.value(problem, tr.successor, sk) -
                            child_threshold);
      if (excess > best_excess) {
        best_excess = excess;
        chosen = &tr.successor;
      }
    }
    if (chosen) {
      // Copy: the successor cache may rehash during the recursive call.
      const InfoState next = *chosen;
      explore(next, depth + 1);
    }

    update(i, key);
  }
};

}  // namespace

SolveResult solve(BeliefMdp& bm, const HsviConfig& config) {
  const auto& problem = bm.problem();
  if (problem.base.gamma() >= 1.0)
    throw std::invalid_argument("hsvi::solve: requires gamma < 1");
  if (config.epsilon <= 0.0)
    throw std::invalid_argument("hsvi::solve: epsilon must be > 0");

  auto [lower, upper] = config.init_mode == HsviConfig::Init::naive
                            ? init_naive(problem, bm.model())
                            : init_combined(problem, bm.model(),
                                            config.combined_policy);

  Solver solver{bm, config, std::move(lower), std::move(upper),
                std::chrono::steady_clock::now()};

  const InfoState i0 = bm.initial_info_state();
  const InfoKey key0 = make_key(i0);
  SolveResult result;
  auto log_root = [&]() {
    result.gap_log.push_back({solver.elapsed(),
                              solver.upper.value(problem, i0, key0),
                              solver.lower.value(problem, i0, key0)});
  };
  log_root();
  while (!problem.base.is_terminal(i0.s)) {
    const double gap = solver.upper.value(problem, i0, key0) -
                       solver.lower.value(problem, i0, key0);
    if (gap <= config.epsilon) break;
    if (solver.elapsed() > config.timeout_secs) {
      solver.timed_out = true;
      break;
    }
    solver.explore(i0, 0);
    ++result.trajectories_explored;
    log_root();
    if (solver.timed_out) break;
  }

  result.root_gap = solver.upper.value(problem, i0, key0) -
                    solver.lower.value(problem, i0, key0);
  result.wall_time_secs = solver.elapsed();
  result.timed_out = solver.timed_out;
  result.lower = std::move(solver.lower);
  result.upper = std::move(solver.upper);
  return result;
}

int HsviPolicy::action(BeliefMdp& bm, const InfoState& i) const {
  const auto& problem = bm.problem();
  const double gamma = problem.base.gamma();
  int best_a = 0;
  double best_q = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < problem.base.num_actions(); ++a) {
    double q = 0.0;
    for (const auto& tr : bm.successors(i, a))
      q += tr.probability *
           (tr.reward + gamma * lower_.value(problem, tr.successor));
    if (q > best_q) {
      best_q = q;
      best_a = a;
    }
  }
  return best_a;
}

HsviPolicy extract_policy(const SolveResult& result) {
  return HsviPolicy(result.lower);
}

}  // namespace pooamdp
