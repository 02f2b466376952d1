#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "pooamdp/problem.hpp"

namespace pooamdp {

/// Virtual state of the equivalent MDP: true state paired with the observer's
/// state belief.
struct InfoState {
  int s = 0;
  Belief b;
};

/// Canonical key: state index plus belief entries rounded to 1e-9, sorted by
/// state index. Two InfoStates with equal keys are treated as identical.
struct InfoKey {
  int s = 0;
  std::vector<std::pair<int, int64_t>> b;

  bool operator==(const InfoKey& other) const = default;
};

InfoKey make_key(const InfoState& i);

struct InfoKeyHash {
  size_t operator()(const InfoKey& k) const;
};

struct InfoTransition {
  InfoState successor;
  double probability = 0.0;
  double reward = 0.0;
};

/// Depth-1 view of the state+belief MDP, with per-invocation caches for
/// successor sets and target beliefs. Not thread-safe; use one instance per
/// thread.
class BeliefMdp {
 public:
  BeliefMdp(const PoOamdp& problem, const ObserverModel& model);

  const PoOamdp& problem() const { return *problem_; }
  const ObserverModel& model() const { return *model_; }

  InfoState initial_info_state() const;
  bool is_terminal(const InfoState& i) const {
    return problem_->base.is_terminal(i.s);
  }

  /// Successor InfoTransitions of (i, a); merged by canonical key, cached.
  /// Empty for terminal i.
  const std::vector<InfoTransition>& successors(const InfoState& i, int a);

  /// Target belief of b, cached by canonical belief key.
  const TargetBelief& target_of(const Belief& b);

  /// Exact optimal value of the horizon-truncated problem (memoized tree
  /// expansion). Throws if more than node_cap distinct nodes are expanded.
  double finite_horizon_value(const InfoState& i, int horizon,
                              size_t node_cap = 5'000'000);

 private:
  struct StepKey {
    InfoKey key;
    int a = 0;
    bool operator==(const StepKey& other) const = default;
  };
  struct StepKeyHash {
    size_t operator()(const StepKey& k) const;
  };
  struct BeliefKeyHash {
    size_t operator()(const std::vector<std::pair<int, int64_t>>& k) const;
  };

  const PoOamdp* problem_;
  const ObserverModel* model_;
  std::unordered_map<StepKey, std::vector<InfoTransition>, StepKeyHash> succ_cache_;
  std::unordered_map<std::vector<std::pair<int, int64_t>>, TargetBelief,
                     BeliefKeyHash>
      target_cache_;
};

}  // namespace pooamdp
