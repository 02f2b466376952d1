#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pooamdp/mdp.hpp"

namespace pooamdp {

/// The requested observation has zero likelihood under the observer's model.
class ImpossibleObservation : public std::runtime_error {
 public:
  explicit ImpossibleObservation(const std::string& what)
      : std::runtime_error(what) {}
};

enum class Criterion { legibility, explicability, action_pred, state_pred, custom };

std::string to_string(Criterion c);
Criterion criterion_from_string(const std::string& name);

/// Sparse distribution over states; entries strictly positive and sorted by
/// state index.
struct Belief {
  std::vector<std::pair<int, double>> probs;

  /// Prunes entries below `prune` and renormalizes.
  static Belief make(std::vector<std::pair<int, double>> entries,
                     double prune = 1e-12);
  double mass_at(int s) const;
};

/// Dense distribution over the target variable's values.
struct TargetBelief {
  std::vector<double> probs;
};

struct PoOamdp {
  // The base MDP's reward slot holds the observer reward R_obs; the agent's
  // own reward is belief-dependent and computed by criterion_reward.
  Mdp base;

  int num_targets = 0;
  std::function<int(int s, int a, int s2)> target_map;

  int num_observations = 0;
  // obs_kernel[a * S + s2] lists (observation, probability).
  std::vector<std::vector<std::pair<int, double>>> obs_kernel;

  double tau = 0.01;
  Criterion criterion = Criterion::legibility;
  double robs_weight = 0.0;
  Belief initial_belief;
  double vi_epsilon = 1e-4;

  // Legibility: target value as a function of the state alone.
  std::function<int(int s)> state_target;
  // Explicability: index of the random-behavior target value.
  int psi0 = -1;
  // States whose observer policy is forced uniform (explicability's psi0
  // block); empty means none.
  std::vector<char> uniform_policy_states;

  // Custom criterion (OAMDP adapters) with its analytic reward range.
  std::function<double(int s, const TargetBelief& beta, int a, int s2,
                       const TargetBelief& beta_next)>
      custom_reward;
  double custom_reward_min = 0.0;
  double custom_reward_max = 0.0;

  // Optional display names for exports.
  std::vector<std::string> state_names;
  std::vector<std::string> obs_names;
  std::vector<std::string> target_names;

  const std::vector<std::pair<int, double>>& obs_row(int a, int s2) const {
    return obs_kernel[static_cast<size_t>(a) *
                          static_cast<size_t>(base.num_states()) +
                      static_cast<size_t>(s2)];
  }
  double obs_prob(int a, int s2, int o) const;

  void validate() const;
};

struct ObserverModel {
  StochasticPolicy pi_obs;
  ValueTable v_obs;
};

/// Solves the observer MDP (base dynamics + R_obs) and derives the softmax
/// policy; rows in uniform_policy_states are replaced by the uniform policy.
ObserverModel build_observer_model(const PoOamdp& problem);

/// One HMM forward step: b'(s') proportional to
/// sum_a O(o|a,s') sum_s T(s'|s,a) pi_obs(a|s) b(s).
Belief filter_step(const PoOamdp& problem, const ObserverModel& model,
                   const Belief& b, int o);

/// Target belief beta(psi) = sum_{s,a,s'} 1{psi=phi(s,a,s')} T pi_obs b.
TargetBelief target_belief(const PoOamdp& problem, const ObserverModel& model,
                           const Belief& b);

/// One-hot target belief at the state's own target value (legibility).
TargetBelief ideal_belief(const PoOamdp& problem, int s);

/// Tolerance-based argmax set of beta.
std::vector<int> candidate_set(const TargetBelief& beta);

/// Agent reward for transition (s,a,s2) given pre- and post-transition target
/// beliefs, plus robs_weight * R_obs(s,a,s2); exactly 0 when s is terminal.
double criterion_reward(const PoOamdp& problem, int s, const TargetBelief& beta,
                        int a, int s2, const TargetBelief& beta_next);

/// Analytic (min, max) of the belief-dependent reward term R_b.
std::pair<double, double> criterion_range(const PoOamdp& problem);

}  // namespace pooamdp
