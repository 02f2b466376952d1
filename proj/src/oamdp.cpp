#include "pooamdp/oamdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pooamdp {

std::vector<double> Oamdp::prior() const {
  if (!type_prior.empty()) return type_prior;
  return std::vector<double>(per_type.size(), 1.0 / static_cast<double>(per_type.size()));
}

void Oamdp::validate() const {
  if (per_type.empty()) throw std::invalid_argument("Oamdp: no types");
  for (const auto& m : per_type) {
    if (m.num_states() != base.num_states() || m.num_actions() != base.num_actions())
      throw std::invalid_argument("Oamdp: per-type MDP shape mismatch");
    if (m.gamma() != base.gamma())
      throw std::invalid_argument("Oamdp: per-type gamma mismatch");
  }
  if (!agent_reward) throw std::invalid_argument("Oamdp: agent_reward missing");
  if (!type_prior.empty()) {
    if (static_cast<int>(type_prior.size()) != num_types())
      throw std::invalid_argument("Oamdp: prior size mismatch");
    double sum = 0.0;
    for (double p : type_prior) sum += p;
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("Oamdp: prior does not sum to 1");
  }
}

PoOamdp convert(const Oamdp& oamdp) {
  oamdp.validate();
  const int S = oamdp.base.num_states();
  const int A = oamdp.base.num_actions();
  const int K = oamdp.num_types();
  const int fake = K;
  const int num_blocks = K + 1;

  // Product state (s, theta) = theta * S + s; fake block last.
  const int s0 = fake * S + oamdp.base.initial_state();
  Mdp product(num_blocks * S, A, oamdp.base.gamma(), s0);
  for (int t = 0; t <= K; ++t) {
    const Mdp& block = t < K ? oamdp.per_type[static_cast<size_t>(t)] : oamdp.base;
    for (int s = 0; s < S; ++s) {
      if (block.is_terminal(s)) {
        product.set_terminal(t * S + s);
        continue;
      }
      for (int a = 0; a < A; ++a)
        for (const auto& out : block.outcomes(s, a)) {
          const double r = t < K ? out.reward : -1.0;
          product.add_transition(t * S + s, a, t * S + out.next, out.prob, r);
        }
    }
  }
  product.finalize();

  PoOamdp problem;
  problem.base = std::move(product);
  problem.tau = oamdp.tau;
  problem.vi_epsilon = oamdp.vi_epsilon;
  problem.criterion = Criterion::custom;
  problem.robs_weight = 0.0;
  problem.num_targets = num_blocks;
  problem.target_map = [S](int s, int, int) { return s / S; };

  problem.num_observations = S;
  problem.obs_kernel.assign(static_cast<size_t>(A) *
                                static_cast<size_t>(num_blocks * S),
                            {});
  for (int a = 0; a < A; ++a)
    for (int s2 = 0; s2 < num_blocks * S; ++s2)
      problem.obs_kernel[static_cast<size_t>(a) *
                             static_cast<size_t>(num_blocks * S) +
                         static_cast<size_t>(s2)] = {{s2 % S, 1.0}};

  const auto prior = oamdp.prior();
  std::vector<std::pair<int, double>> b0;
  for (int t = 0; t < K; ++t)
    b0.emplace_back(t * S + oamdp.base.initial_state(),
                    prior[static_cast<size_t>(t)]);
  problem.initial_belief = Belief::make(std::move(b0));

  const auto agent_reward = oamdp.agent_reward;
  problem.custom_reward = [agent_reward, S, K](int s, const TargetBelief& beta,
                                               int a, int /*s2*/,
                                               const TargetBelief& /*beta_next*/) {
    // The fake-type component of beta is always 0; drop it for the adapter.
    std::vector<double> type_belief(beta.probs.begin(),
                                    beta.probs.begin() + K);
    return agent_reward(s % S, a, type_belief);
  };
  problem.custom_reward_min = oamdp.agent_reward_min;
  problem.custom_reward_max = oamdp.agent_reward_max;

  problem.validate();
  return problem;
}

double oamdp_history_value(const Oamdp& oamdp, int horizon, size_t node_cap) {
  oamdp.validate();
  const int S = oamdp.base.num_states();
  const int A = oamdp.base.num_actions();
  const int K = oamdp.num_types();
  const double gamma = oamdp.base.gamma();

  // Per-type softmax observer policies, matching build_observer_model's
  // value-iteration settings on the product construction.
  SweepOptions opts;
  opts.epsilon = oamdp.vi_epsilon;
  opts.seed_states = {oamdp.base.initial_state()};
  std::vector<StochasticPolicy> pi(static_cast<size_t>(K));
  for (int t = 0; t < K; ++t) {
    const Mdp& m = oamdp.per_type[static_cast<size_t>(t)];
    pi[static_cast<size_t>(t)] =
        softmax_policy(m, value_iteration(m, opts), oamdp.tau);
  }

  // Observer state-transition marginal per type: P^t(s'|s) = sum_a pi T.
  auto marginal = [&](int t, int s, int s2) {
    const Mdp& m = oamdp.per_type[static_cast<size_t>(t)];
    double p = 0.0;
    for (int a = 0; a < A; ++a) {
      const double pa = pi[static_cast<size_t>(t)]
                            .probs[static_cast<size_t>(s)][static_cast<size_t>(a)];
      if (pa == 0.0) continue;
      for (const auto& out : m.outcomes(s, a))
        if (out.next == s2) p += pa * out.prob;
    }
    return p;
  };

  size_t nodes = 0;
  const std::function<double(int, const std::vector<double>&, int)> rec =
      [&](int s, const std::vector<double>& beta, int h) -> double {
    if (h == 0 || oamdp.base.is_terminal(s)) return 0.0;
    if (++nodes > node_cap)
      throw std::runtime_error("oamdp_history_value: node cap exceeded");
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < A; ++a) {
      const double r = oamdp.agent_reward(s, a, beta);
      double q = r;
      for (const auto& out : oamdp.base.outcomes(s, a)) {
        // Bayesian type update on the observed state transition s -> out.next;
        // the observer does not see which type's terminal set applies.
        std::vector<double> next(static_cast<size_t>(K), 0.0);
        double total = 0.0;
        for (int t = 0; t < K; ++t) {
          const bool frozen = oamdp.per_type[static_cast<size_t>(t)].is_terminal(s);
          const double like = frozen ? (out.next == s ? 1.0 : 0.0)
                                     : marginal(t, s, out.next);
          next[static_cast<size_t>(t)] = beta[static_cast<size_t>(t)] * like;
          total += next[static_cast<size_t>(t)];
        }
        if (total <= 0.0)
          throw std::runtime_error(
              "oamdp_history_value: transition impossible under all types");
        for (auto& p : next) p /= total;
        q += gamma * out.prob * rec(out.next, next, h - 1);
      }
      best = std::max(best, q);
    }
    return best;
  };

  return rec(oamdp.base.initial_state(), oamdp.prior(), horizon);
}

}  // namespace pooamdp
