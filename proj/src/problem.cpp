#include "pooamdp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace pooamdp {

namespace {
constexpr double kArgmaxTol = 1e-9;
// Observations the agent deliberately makes surprising can carry predicted
// mass as small as exp(-gap/tau) ~ 1e-44 while still being structurally
// possible and renormalizable; only underflow-level mass means the
// observation is truly impossible under the model.
constexpr double kZeroMassTol = 1e-300;
}  // namespace

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::legibility: return "legibility";
    case Criterion::explicability: return "explicability";
    case Criterion::action_pred: return "action-pred";
    case Criterion::state_pred: return "state-pred";
    case Criterion::custom: return "custom";
  }
  return "?";
}

Criterion criterion_from_string(const std::string& name) {
  if (name == "legibility") return Criterion::legibility;
  if (name == "explicability") return Criterion::explicability;
  if (name == "action-pred" || name == "action_pred") return Criterion::action_pred;
  if (name == "state-pred" || name == "state_pred") return Criterion::state_pred;
  if (name == "custom") return Criterion::custom;
  throw std::invalid_argument("unknown criterion: " + name);
}

Belief Belief::make(std::vector<std::pair<int, double>> entries, double prune) {
  std::sort(entries.begin(), entries.end());
  Belief b;
  double sum = 0.0;
  for (const auto& [s, p] : entries) {
    if (p < 0.0) throw std::invalid_argument("Belief: negative entry");
    sum += p;
  }
  if (sum <= 0.0) throw std::invalid_argument("Belief: zero total mass");
  for (const auto& [s, p] : entries) {
    const double q = p / sum;
    if (q > prune) b.probs.emplace_back(s, q);
  }
  // Renormalize after pruning so entries sum to 1 exactly (within fp error).
  double kept = 0.0;
  for (const auto& [s, p] : b.probs) kept += p;
  for (auto& [s, p] : b.probs) p /= kept;
  return b;
}

double Belief::mass_at(int s) const {
  for (const auto& [state, p] : probs)
    if (state == s) return p;
  return 0.0;
}

double PoOamdp::obs_prob(int a, int s2, int o) const {
  for (const auto& [obs, p] : obs_row(a, s2))
    if (obs == o) return p;
  return 0.0;
}

void PoOamdp::validate() const {
  const int S = base.num_states();
  const int A = base.num_actions();
  if (num_targets <= 0) throw std::invalid_argument("PoOamdp: empty target set");
  if (num_observations <= 0)
    throw std::invalid_argument("PoOamdp: empty observation set");
  if (tau <= 0.0) throw std::invalid_argument("PoOamdp: tau must be > 0");
  if (robs_weight < 0.0)
    throw std::invalid_argument("PoOamdp: robs_weight must be >= 0");
  if (obs_kernel.size() != static_cast<size_t>(S) * static_cast<size_t>(A))
    throw std::invalid_argument("PoOamdp: obs_kernel size mismatch");
  for (int a = 0; a < A; ++a) {
    for (int s2 = 0; s2 < S; ++s2) {
      double sum = 0.0;
      for (const auto& [o, p] : obs_row(a, s2)) {
        if (o < 0 || o >= num_observations)
          throw std::invalid_argument("PoOamdp: observation index out of range");
        if (p < 0.0) throw std::invalid_argument("PoOamdp: negative obs probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("PoOamdp: obs_kernel row does not sum to 1");
    }
  }
  if (!target_map) throw std::invalid_argument("PoOamdp: target_map missing");
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      for (const auto& out : base.outcomes(s, a)) {
        const int psi = target_map(s, a, out.next);
        if (psi < 0 || psi >= num_targets)
          throw std::invalid_argument("PoOamdp: target_map out of range");
      }
    }
  }
  double bsum = 0.0;
  for (const auto& [s, p] : initial_belief.probs) {
    if (base.is_terminal(s))
      throw std::invalid_argument("PoOamdp: initial belief on a terminal state");
    bsum += p;
  }
  if (std::abs(bsum - 1.0) > 1e-9)
    throw std::invalid_argument("PoOamdp: initial belief does not sum to 1");
  if (criterion == Criterion::explicability && psi0 < 0)
    throw std::invalid_argument("PoOamdp: explicability requires psi0");
  if (criterion == Criterion::custom && !custom_reward)
    throw std::invalid_argument("PoOamdp: custom criterion requires custom_reward");
  if (criterion == Criterion::legibility) {
    if (!state_target)
      throw std::invalid_argument("PoOamdp: legibility requires a state-only target");
    for (int s = 0; s < S; ++s) {
      if (base.is_terminal(s)) continue;
      for (int a = 0; a < A; ++a)
        for (const auto& out : base.outcomes(s, a))
          if (target_map(s, a, out.next) != state_target(s))
            throw std::invalid_argument(
                "PoOamdp: target_map is not state-determined");
    }
  }
}

ObserverModel build_observer_model(const PoOamdp& problem) {
  SweepOptions opts;
  opts.epsilon = problem.vi_epsilon;
  for (const auto& [s, p] : problem.initial_belief.probs)
    opts.seed_states.push_back(s);
  opts.seed_states.push_back(problem.base.initial_state());
  ObserverModel model;
  model.v_obs = value_iteration(problem.base, opts);
  model.pi_obs = softmax_policy(problem.base, model.v_obs, problem.tau);
  if (!problem.uniform_policy_states.empty()) {
    const double u = 1.0 / problem.base.num_actions();
    for (int s = 0; s < problem.base.num_states(); ++s)
      if (problem.uniform_policy_states[static_cast<size_t>(s)])
        std::fill(model.pi_obs.probs[static_cast<size_t>(s)].begin(),
                  model.pi_obs.probs[static_cast<size_t>(s)].end(), u);
  }
  return model;
}

Belief filter_step(const PoOamdp& problem, const ObserverModel& model,
                   const Belief& b, int o) {
  std::unordered_map<int, double> mass;
  for (const auto& [s, p] : b.probs) {
    const auto& row = model.pi_obs.probs[static_cast<size_t>(s)];
    for (int a = 0; a < problem.base.num_actions(); ++a) {
      const double w = row[static_cast<size_t>(a)] * p;
      if (w == 0.0) continue;
      for (const auto& out : problem.base.outcomes(s, a)) {
        const double like = problem.obs_prob(a, out.next, o);
        if (like > 0.0) mass[out.next] += w * out.prob * like;
      }
    }
  }
  double total = 0.0;
  for (const auto& [s, m] : mass) total += m;
  if (total <= kZeroMassTol) {
    // The softmax-weighted prediction underflowed (a long run of actions the
    // observer finds implausible). Fall back to a policy-agnostic prediction;
    // only an observation no transition can emit is truly impossible.
    mass.clear();
    for (const auto& [s, p] : b.probs) {
      for (int a = 0; a < problem.base.num_actions(); ++a) {
        for (const auto& out : problem.base.outcomes(s, a)) {
          const double like = problem.obs_prob(a, out.next, o);
          if (like > 0.0) mass[out.next] += p * out.prob * like;
        }
      }
    }
    total = 0.0;
    for (const auto& [s, m] : mass) total += m;
  }
  if (total <= kZeroMassTol)
    throw ImpossibleObservation("filter_step: observation " + std::to_string(o) +
                                " has zero likelihood");
  std::vector<std::pair<int, double>> entries(mass.begin(), mass.end());
  // No pruning: entries the observer deems implausible (e.g. wall hits under
  // a sharp softmax, ~exp(-gap/tau)) must stay in the support, otherwise a
  // later observation of that branch would wrongly look impossible.
  return Belief::make(std::move(entries), 0.0);
}

TargetBelief target_belief(const PoOamdp& problem, const ObserverModel& model,
                           const Belief& b) {
  TargetBelief beta;
  beta.probs.assign(static_cast<size_t>(problem.num_targets), 0.0);
  for (const auto& [s, p] : b.probs) {
    const auto& row = model.pi_obs.probs[static_cast<size_t>(s)];
    for (int a = 0; a < problem.base.num_actions(); ++a) {
      const double w = row[static_cast<size_t>(a)] * p;
      if (w == 0.0) continue;
      for (const auto& out : problem.base.outcomes(s, a))
        beta.probs[static_cast<size_t>(problem.target_map(s, a, out.next))] +=
            w * out.prob;
    }
  }
  return beta;
}

TargetBelief ideal_belief(const PoOamdp& problem, int s) {
  if (!problem.state_target)
    throw std::logic_error("ideal_belief: target is not state-determined");
  TargetBelief beta;
  beta.probs.assign(static_cast<size_t>(problem.num_targets), 0.0);
  beta.probs[static_cast<size_t>(problem.state_target(s))] = 1.0;
  return beta;
}

std::vector<int> candidate_set(const TargetBelief& beta) {
  const double best = *std::max_element(beta.probs.begin(), beta.probs.end());
  std::vector<int> result;
  for (size_t i = 0; i < beta.probs.size(); ++i)
    if (beta.probs[i] >= best - kArgmaxTol) result.push_back(static_cast<int>(i));
  return result;
}

namespace {

double pred_reward(const TargetBelief& beta, int psi) {
  const auto candidates = candidate_set(beta);
  const bool member =
      std::find(candidates.begin(), candidates.end(), psi) != candidates.end();
  const double pred = member ? 1.0 / static_cast<double>(candidates.size()) : 0.0;
  return pred - 1.0;
}

}  // namespace

double criterion_reward(const PoOamdp& problem, int s, const TargetBelief& beta,
                        int a, int s2, const TargetBelief& beta_next) {
  if (problem.base.is_terminal(s)) return 0.0;
  double r = 0.0;
  switch (problem.criterion) {
    case Criterion::legibility: {
      const auto ideal = ideal_belief(problem, s);
      double sq = 0.0;
      for (size_t i = 0; i < beta.probs.size(); ++i) {
        const double d = beta.probs[i] - ideal.probs[i];
        sq += d * d;
      }
      r = -std::sqrt(sq);
      break;
    }
    case Criterion::explicability:
      r = -beta.probs[static_cast<size_t>(problem.psi0)];
      break;
    case Criterion::action_pred:
    case Criterion::state_pred:
      r = pred_reward(beta, problem.target_map(s, a, s2));
      break;
    case Criterion::custom:
      r = problem.custom_reward(s, beta, a, s2, beta_next);
      break;
  }
  if (problem.robs_weight != 0.0)
    r += problem.robs_weight * problem.base.reward(s, a, s2);
  return r;
}

std::pair<double, double> criterion_range(const PoOamdp& problem) {
  switch (problem.criterion) {
    case Criterion::legibility: return {-std::sqrt(2.0), 0.0};
    case Criterion::explicability: return {-1.0, 0.0};
    case Criterion::action_pred:
    case Criterion::state_pred: return {-1.0, 0.0};
    case Criterion::custom:
      return {problem.custom_reward_min, problem.custom_reward_max};
  }
  return {0.0, 0.0};
}

}  // namespace pooamdp
