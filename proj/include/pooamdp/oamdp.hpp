#pragma once

#include <functional>
#include <vector>

#include "pooamdp/problem.hpp"

namespace pooamdp {

/// Classic observer-aware MDP: one MDP per static type, a belief over types
/// maintained by the observer, and an agent reward over that belief.
struct Oamdp {
  // True dynamics (reward slot unused) with terminal set and initial state.
  Mdp base;
  // One MDP per type: transitions T^theta, rewards R_obs^theta, terminals
  // S_f^theta; same state/action sets and gamma as `base`.
  std::vector<Mdp> per_type;
  // Agent reward R_ag(s, a, belief over types).
  std::function<double(int s, int a, const std::vector<double>& type_belief)>
      agent_reward;
  double agent_reward_min = 0.0;
  double agent_reward_max = 0.0;
  double tau = 0.01;
  double vi_epsilon = 1e-4;
  std::vector<double> type_prior;  // empty means uniform

  int num_types() const { return static_cast<int>(per_type.size()); }
  std::vector<double> prior() const;
  void validate() const;
};

/// Equivalent PO-OAMDP over the product state space S x (Theta + {fake}),
/// with deterministic state-identity observations; the fake type carries the
/// true dynamics and a -1 per-step observer reward.
PoOamdp convert(const Oamdp& oamdp);

/// Exact optimal finite-horizon value of the OAMDP by enumerating state
/// histories and the observer's Bayesian type belief (which conditions on the
/// state sequence, marginalizing the agent's actions as in the BST model).
double oamdp_history_value(const Oamdp& oamdp, int horizon,
                           size_t node_cap = 5'000'000);

}  // namespace pooamdp
