#include "pooamdp/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace pooamdp {

namespace {
constexpr double kRowSumTol = 1e-9;
}

Mdp::Mdp(int num_states, int num_actions, double gamma, int initial_state)
    : num_states_(num_states),
      num_actions_(num_actions),
      gamma_(gamma),
      initial_state_(initial_state),
      rows_(static_cast<size_t>(num_states) * static_cast<size_t>(num_actions)),
      terminal_(static_cast<size_t>(num_states), 0) {
  if (num_states <= 0 || num_actions <= 0)
    throw std::invalid_argument("Mdp: empty state or action set");
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("Mdp: gamma outside [0,1]");
  if (initial_state < 0 || initial_state >= num_states)
    throw std::invalid_argument("Mdp: invalid initial state");
}

void Mdp::add_transition(int s, int a, int next, double prob, double reward) {
  if (prob < 0.0) throw std::invalid_argument("Mdp: negative probability");
  if (prob == 0.0) return;
  auto& row = rows_[row_index(s, a)];
  for (auto& out : row) {
    if (out.next == next) {
      // Merge duplicate successors; rewards must agree.
      if (std::abs(out.reward - reward) > 1e-12)
        throw std::invalid_argument("Mdp: conflicting rewards for one (s,a,s')");
      out.prob += prob;
      return;
    }
  }
  row.push_back({next, prob, reward});
}

void Mdp::set_terminal(int s) {
  if (!terminal_[static_cast<size_t>(s)]) {
    terminal_[static_cast<size_t>(s)] = 1;
    ++num_terminals_;
  }
}

void Mdp::finalize() {
  for (int s = 0; s < num_states_; ++s) {
    if (terminal_[static_cast<size_t>(s)]) {
      for (int a = 0; a < num_actions_; ++a)
        rows_[row_index(s, a)] = {{s, 1.0, 0.0}};
      continue;
    }
    for (int a = 0; a < num_actions_; ++a) {
      const auto& row = rows_[row_index(s, a)];
      double sum = 0.0;
      for (const auto& out : row) sum += out.prob;
      if (std::abs(sum - 1.0) > kRowSumTol)
        throw std::invalid_argument("Mdp: row (" + std::to_string(s) + "," +
                                    std::to_string(a) + ") sums to " +
                                    std::to_string(sum));
    }
  }
  if (gamma_ == 1.0 && num_terminals_ == 0)
    throw std::invalid_argument("Mdp: gamma == 1 requires terminal states");
  finalized_ = true;
}

double Mdp::reward(int s, int a, int s2) const {
  for (const auto& out : rows_[row_index(s, a)])
    if (out.next == s2) return out.reward;
  return 0.0;
}

std::vector<int> Mdp::reachable_from(std::span<const int> seeds) const {
  std::vector<char> seen(static_cast<size_t>(num_states_), 0);
  std::deque<int> queue;
  for (int s : seeds) {
    if (!seen[static_cast<size_t>(s)]) {
      seen[static_cast<size_t>(s)] = 1;
      queue.push_back(s);
    }
  }
  std::vector<int> result;
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    result.push_back(s);
    for (int a = 0; a < num_actions_; ++a) {
      for (const auto& out : outcomes(s, a)) {
        if (!seen[static_cast<size_t>(out.next)]) {
          seen[static_cast<size_t>(out.next)] = 1;
          queue.push_back(out.next);
        }
      }
    }
  }
  return result;
}

namespace {

std::vector<int> sweep_states(const Mdp& mdp, const SweepOptions& opts) {
  if (opts.all_states) {
    std::vector<int> all(static_cast<size_t>(mdp.num_states()));
    for (int s = 0; s < mdp.num_states(); ++s) all[static_cast<size_t>(s)] = s;
    return all;
  }
  std::vector<int> seeds = opts.seed_states;
  if (seeds.empty()) seeds.push_back(mdp.initial_state());
  return mdp.reachable_from(seeds);
}

double residual_threshold(const Mdp& mdp, double epsilon) {
  const double g = mdp.gamma();
  return g < 1.0 ? epsilon * (1.0 - g) / g : epsilon;
}

}  // namespace

ValueTable value_iteration(const Mdp& mdp, const SweepOptions& opts) {
  if (opts.epsilon <= 0.0) throw std::invalid_argument("epsilon must be > 0");
  const auto states = sweep_states(mdp, opts);
  const double thr = residual_threshold(mdp, opts.epsilon);
  ValueTable v(static_cast<size_t>(mdp.num_states()), 0.0);
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double residual = 0.0;
    for (int s : states) {
      if (mdp.is_terminal(s)) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < mdp.num_actions(); ++a) {
        double q = 0.0;
        for (const auto& out : mdp.outcomes(s, a))
          q += out.prob * (out.reward + mdp.gamma() * v[static_cast<size_t>(out.next)]);
        best = std::max(best, q);
      }
      residual = std::max(residual, std::abs(best - v[static_cast<size_t>(s)]));
      v[static_cast<size_t>(s)] = best;
    }
    if (residual <= thr) return v;
  }
  if (mdp.gamma() == 1.0)
    throw DivergenceError("value_iteration: no convergence within sweep cap (invalid SSP?)");
  return v;  // gamma < 1: converged to numerical precision of the cap
}

std::vector<double> q_values(const Mdp& mdp, const ValueTable& v, int s) {
  std::vector<double> q(static_cast<size_t>(mdp.num_actions()), 0.0);
  for (int a = 0; a < mdp.num_actions(); ++a) {
    double sum = 0.0;
    for (const auto& out : mdp.outcomes(s, a))
      sum += out.prob * (out.reward + mdp.gamma() * v[static_cast<size_t>(out.next)]);
    q[static_cast<size_t>(a)] = sum;
  }
  return q;
}

StochasticPolicy greedy_policy(const Mdp& mdp, const ValueTable& v) {
  StochasticPolicy pi;
  pi.probs.assign(static_cast<size_t>(mdp.num_states()),
                  std::vector<double>(static_cast<size_t>(mdp.num_actions()), 0.0));
  for (int s = 0; s < mdp.num_states(); ++s) {
    const auto q = q_values(mdp, v, s);
    int best = 0;
    for (int a = 1; a < mdp.num_actions(); ++a)
      if (q[static_cast<size_t>(a)] > q[static_cast<size_t>(best)]) best = a;
    pi.probs[static_cast<size_t>(s)][static_cast<size_t>(best)] = 1.0;
  }
  return pi;
}

StochasticPolicy softmax_policy(const Mdp& mdp, const ValueTable& v, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("softmax_policy: tau must be > 0");
  StochasticPolicy pi;
  pi.probs.assign(static_cast<size_t>(mdp.num_states()),
                  std::vector<double>(static_cast<size_t>(mdp.num_actions()), 0.0));
  for (int s = 0; s < mdp.num_states(); ++s) {
    const auto q = q_values(mdp, v, s);
    const double qmax = *std::max_element(q.begin(), q.end());
    auto& row = pi.probs[static_cast<size_t>(s)];
    double sum = 0.0;
    for (int a = 0; a < mdp.num_actions(); ++a) {
      row[static_cast<size_t>(a)] = std::exp((q[static_cast<size_t>(a)] - qmax) / tau);
      sum += row[static_cast<size_t>(a)];
    }
    for (auto& p : row) p /= sum;
  }
  return pi;
}

ValueTable policy_evaluation(const Mdp& mdp, const StochasticPolicy& pi,
                             const RewardFn* reward_override,
                             const SweepOptions& opts) {
  if (opts.epsilon <= 0.0) throw std::invalid_argument("epsilon must be > 0");
  const auto states = sweep_states(mdp, opts);
  const double thr = residual_threshold(mdp, opts.epsilon);
  ValueTable v(static_cast<size_t>(mdp.num_states()), 0.0);
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double residual = 0.0;
    for (int s : states) {
      if (mdp.is_terminal(s)) continue;
      double sum = 0.0;
      for (int a = 0; a < mdp.num_actions(); ++a) {
        const double pa = pi.probs[static_cast<size_t>(s)][static_cast<size_t>(a)];
        if (pa == 0.0) continue;
        for (const auto& out : mdp.outcomes(s, a)) {
          const double r = reward_override ? (*reward_override)(s, a, out.next)
                                           : out.reward;
          sum += pa * out.prob * (r + mdp.gamma() * v[static_cast<size_t>(out.next)]);
        }
      }
      residual = std::max(residual, std::abs(sum - v[static_cast<size_t>(s)]));
      v[static_cast<size_t>(s)] = sum;
    }
    if (residual <= thr) return v;
  }
  if (mdp.gamma() == 1.0)
    throw DivergenceError("policy_evaluation: no convergence within sweep cap (improper policy?)");
  return v;
}

bool is_proper(const Mdp& mdp, const StochasticPolicy& pi) {
  // Terminal states are absorbing, so absorption happens with probability 1
  // from s iff a terminal is reachable (in the policy's support graph) from
  // every state reachable from s.
  std::vector<char> seen(static_cast<size_t>(mdp.num_states()), 0);
  std::deque<int> queue{mdp.initial_state()};
  seen[static_cast<size_t>(mdp.initial_state())] = 1;
  std::vector<int> reachable;
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    reachable.push_back(s);
    if (mdp.is_terminal(s)) continue;
    for (int a = 0; a < mdp.num_actions(); ++a) {
      if (pi.probs[static_cast<size_t>(s)][static_cast<size_t>(a)] == 0.0) continue;
      for (const auto& out : mdp.outcomes(s, a)) {
        if (!seen[static_cast<size_t>(out.next)]) {
          seen[static_cast<size_t>(out.next)] = 1;
          queue.push_back(out.next);
        }
      }
    }
  }
  for (int s : reachable) {
    if (mdp.is_terminal(s)) continue;
    // BFS from s through the support graph looking for a terminal.
    std::vector<char> visited(static_cast<size_t>(mdp.num_states()), 0);
    std::deque<int> q2{s};
    visited[static_cast<size_t>(s)] = 1;
    bool found = false;
    while (!q2.empty() && !found) {
      const int u = q2.front();
      q2.pop_front();
      if (mdp.is_terminal(u)) {
        found = true;
        break;
      }
      for (int a = 0; a < mdp.num_actions(); ++a) {
        if (pi.probs[static_cast<size_t>(u)][static_cast<size_t>(a)] == 0.0) continue;
        for (const auto& out : mdp.outcomes(u, a)) {
          if (!visited[static_cast<size_t>(out.next)]) {
            visited[static_cast<size_t>(out.next)] = 1;
            q2.push_back(out.next);
          }
        }
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace pooamdp
