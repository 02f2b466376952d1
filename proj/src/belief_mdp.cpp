#include "pooamdp/belief_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pooamdp {

namespace {

constexpr double kKeyScale = 1e9;

int64_t round_prob(double p) {
  return static_cast<int64_t>(std::llround(p * kKeyScale));
}

std::vector<std::pair<int, int64_t>> belief_key(const Belief& b) {
  std::vector<std::pair<int, int64_t>> key;
  key.reserve(b.probs.size());
  for (const auto& [s, p] : b.probs) {
    // Entries rounding to zero are dropped so that beliefs differing only in
    // negligible support share one key.
    if (const int64_t q = round_prob(p); q != 0) key.emplace_back(s, q);
  }
  return key;
}

size_t hash_combine(size_t seed, size_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

size_t hash_belief_key(const std::vector<std::pair<int, int64_t>>& key) {
  size_t h = key.size();
  for (const auto& [s, q] : key) {
    h = hash_combine(h, std::hash<int>{}(s));
    h = hash_combine(h, std::hash<int64_t>{}(q));
  }
  return h;
}

}  // namespace

InfoKey make_key(const InfoState& i) {
  return InfoKey{i.s, belief_key(i.b)};
}

size_t InfoKeyHash::operator()(const InfoKey& k) const {
  return hash_combine(std::hash<int>{}(k.s), hash_belief_key(k.b));
}

size_t BeliefMdp::StepKeyHash::operator()(const StepKey& k) const {
  return hash_combine(InfoKeyHash{}(k.key), std::hash<int>{}(k.a));
}

size_t BeliefMdp::BeliefKeyHash::operator()(
    const std::vector<std::pair<int, int64_t>>& k) const {
  return hash_belief_key(k);
}

BeliefMdp::BeliefMdp(const PoOamdp& problem, const ObserverModel& model)
    : problem_(&problem), model_(&model) {}

InfoState BeliefMdp::initial_info_state() const {
  return InfoState{problem_->base.initial_state(), problem_->initial_belief};
}

const TargetBelief& BeliefMdp::target_of(const Belief& b) {
  auto key = belief_key(b);
  auto it = target_cache_.find(key);
  if (it != target_cache_.end()) return it->second;
  auto [inserted, ok] =
      target_cache_.emplace(std::move(key), target_belief(*problem_, *model_, b));
  return inserted->second;
}

const std::vector<InfoTransition>& BeliefMdp::successors(const InfoState& i,
                                                         int a) {
  StepKey sk{make_key(i), a};
  auto it = succ_cache_.find(sk);
  if (it != succ_cache_.end()) return it->second;

  std::vector<InfoTransition> result;
  if (!is_terminal(i)) {
    const TargetBelief beta = target_of(i.b);
    for (const auto& out : problem_->base.outcomes(i.s, a)) {
      for (const auto& [o, olike] : problem_->obs_row(a, out.next)) {
        if (olike <= 0.0) continue;
        Belief b_next = filter_step(*problem_, *model_, i.b, o);
        const double prob = out.prob * olike;
        InfoState succ{out.next, std::move(b_next)};
        const InfoKey succ_key = make_key(succ);
        const double reward = criterion_reward(*problem_, i.s, beta, a, out.next,
                                               target_of(succ.b));
        bool merged = false;
        for (auto& tr : result) {
          if (make_key(tr.successor) == succ_key) {
            tr.probability += prob;
            merged = true;
            break;
          }
        }
        if (!merged) result.push_back({std::move(succ), prob, reward});
      }
    }
  }
  auto [inserted, ok] = succ_cache_.emplace(std::move(sk), std::move(result));
  return inserted->second;
}

double BeliefMdp::finite_horizon_value(const InfoState& i, int horizon,
                                       size_t node_cap) {
  if (horizon < 0) throw std::invalid_argument("finite_horizon_value: horizon < 0");

  struct MemoKey {
    InfoKey key;
    int h;
    bool operator==(const MemoKey&) const = default;
  };
  struct MemoHash {
    size_t operator()(const MemoKey& k) const {
      return hash_combine(InfoKeyHash{}(k.key), std::hash<int>{}(k.h));
    }
  };
  std::unordered_map<MemoKey, double, MemoHash> memo;

  const std::function<double(const InfoState&, int)> rec =
      [&](const InfoState& node, int h) -> double {
    if (h == 0 || is_terminal(node)) return 0.0;
    MemoKey mk{make_key(node), h};
    if (auto it = memo.find(mk); it != memo.end()) return it->second;
    if (memo.size() >= node_cap)
      throw std::runtime_error("finite_horizon_value: node cap exceeded");
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < problem_->base.num_actions(); ++a) {
      double q = 0.0;
      for (const auto& tr : successors(node, a))
        q += tr.probability *
             (tr.reward + problem_->base.gamma() * rec(tr.successor, h - 1));
      best = std::max(best, q);
    }
    memo.emplace(std::move(mk), best);
    return best;
  };
  return rec(i, horizon);
}

}  // namespace pooamdp
