#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pooamdp {

/// Thrown when an undiscounted evaluation fails to converge within the sweep
/// cap, which signals an invalid stochastic shortest path (improper policy).
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

struct Outcome {
  int next = 0;
  double prob = 0.0;
  double reward = 0.0;
};

/// Finite MDP with sparse successor lists per (state, action).
///
/// Terminal states follow the usual convention: a self-loop with probability
/// one and zero reward, installed by finalize().
class Mdp {
 public:
  Mdp() = default;
  Mdp(int num_states, int num_actions, double gamma, int initial_state);

  void add_transition(int s, int a, int next, double prob, double reward);
  void set_terminal(int s);
  void set_initial_state(int s) { initial_state_ = s; }

  /// Installs terminal self-loops and validates row stochasticity.
  void finalize();

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  double gamma() const { return gamma_; }
  int initial_state() const { return initial_state_; }
  bool is_terminal(int s) const { return terminal_[static_cast<size_t>(s)] != 0; }
  bool has_terminals() const { return num_terminals_ > 0; }

  std::span<const Outcome> outcomes(int s, int a) const {
    return {rows_[row_index(s, a)].data(), rows_[row_index(s, a)].size()};
  }

  /// Reward of a specific transition; 0 if (s,a,s2) has probability zero.
  double reward(int s, int a, int s2) const;

  /// States reachable from the given seeds under arbitrary actions.
  std::vector<int> reachable_from(std::span<const int> seeds) const;

 private:
  size_t row_index(int s, int a) const {
    return static_cast<size_t>(s) * static_cast<size_t>(num_actions_) +
           static_cast<size_t>(a);
  }

  int num_states_ = 0;
  int num_actions_ = 0;
  double gamma_ = 0.99;
  int initial_state_ = 0;
  int num_terminals_ = 0;
  std::vector<std::vector<Outcome>> rows_;
  std::vector<char> terminal_;
  bool finalized_ = false;
};

struct StochasticPolicy {
  // probs[s][a]; rows sum to 1.
  std::vector<std::vector<double>> probs;
};

using ValueTable = std::vector<double>;
using RewardFn = std::function<double(int s, int a, int s2)>;

struct SweepOptions {
  double epsilon = 1e-4;
  int max_sweeps = 100000;
  // Residuals are measured (and values computed) over states reachable from
  // these seeds; empty means {initial_state}.
  std::vector<int> seed_states;
  bool all_states = false;
};

/// Value iteration to a Bellman residual of epsilon*(1-gamma)/gamma when
/// gamma < 1, or epsilon when gamma == 1 (SSP mode, guarded by max_sweeps).
ValueTable value_iteration(const Mdp& mdp, const SweepOptions& opts = {});

std::vector<double> q_values(const Mdp& mdp, const ValueTable& v, int s);

/// Deterministic greedy policy; ties broken by lowest action index.
StochasticPolicy greedy_policy(const Mdp& mdp, const ValueTable& v);

/// pi(a|s) = exp(Q(s,a)/tau) / sum_a' exp(Q(s,a')/tau), in log space.
StochasticPolicy softmax_policy(const Mdp& mdp, const ValueTable& v, double tau);

/// Iterative evaluation of pi, optionally under a replacement reward.
ValueTable policy_evaluation(const Mdp& mdp, const StochasticPolicy& pi,
                             const RewardFn* reward_override = nullptr,
                             const SweepOptions& opts = {});

/// True iff, restricted to states reachable from the initial state under the
/// support of pi, every recurrent class intersects the terminal set.
bool is_proper(const Mdp& mdp, const StochasticPolicy& pi);

}  // namespace pooamdp
