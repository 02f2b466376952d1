#pragma once

#include <functional>
#include <unordered_map>

#include "pooamdp/belief_mdp.hpp"

namespace pooamdp {

/// Pointwise value bound: stored values at visited points, an analytic
/// initialization rule elsewhere. Terminal InfoStates always evaluate to 0.
struct BoundTable {
  enum class Kind { lower, upper };

  Kind kind = Kind::lower;
  std::function<double(const InfoState&)> init;
  std::unordered_map<InfoKey, double, InfoKeyHash> stored;

  double value(const PoOamdp& problem, const InfoState& i) const;
  double value(const PoOamdp& problem, const InfoState& i, const InfoKey& key) const;
};

struct HsviConfig {
  enum class Init { naive, combined };
  enum class CombinedPolicy { pi_obs, pi_star_s };

  double epsilon = 1e-3;
  double timeout_secs = 3600.0;
  Init init_mode = Init::combined;
  CombinedPolicy combined_policy = CombinedPolicy::pi_obs;
  int max_depth = 10000;
};

struct GapLogEntry {
  double seconds = 0.0;
  double upper = 0.0;
  double lower = 0.0;
};

struct SolveResult {
  BoundTable lower;
  BoundTable upper;
  double root_gap = 0.0;
  long trajectories_explored = 0;
  double wall_time_secs = 0.0;
  bool timed_out = false;
  std::vector<GapLogEntry> gap_log;
};

/// Constant bounds R'^min/(1-gamma) and R'^max/(1-gamma).
std::pair<BoundTable, BoundTable> init_naive(const PoOamdp& problem,
                                             const ObserverModel& model);

/// Decomposition-based bounds: lower via V_s^pi(s) + R_b^min * V_costToGo^pi(s),
/// upper via V*_s(s) + R_b^max/(1-gamma). Vectors returned for serialization.
struct CombinedInitData {
  std::vector<double> v_s_pi;
  std::vector<double> v_cost_to_go;
  std::vector<double> v_s_star;
  double r_b_min = 0.0;
  double r_b_max = 0.0;
};
std::pair<BoundTable, BoundTable> init_combined(const PoOamdp& problem,
                                                const ObserverModel& model,
                                                HsviConfig::CombinedPolicy policy,
                                                CombinedInitData* data = nullptr);

/// Trial-based heuristic search until upper(i0) - lower(i0) <= epsilon or
/// timeout. Requires gamma < 1.
SolveResult solve(BeliefMdp& bm, const HsviConfig& config);

/// One-step lookahead greedy decision rule with respect to a lower bound.
class HsviPolicy {
 public:
  explicit HsviPolicy(BoundTable lower) : lower_(std::move(lower)) {}
  int action(BeliefMdp& bm, const InfoState& i) const;
  const BoundTable& lower() const { return lower_; }

 private:
  BoundTable lower_;
};

HsviPolicy extract_policy(const SolveResult& result);

}  // namespace pooamdp
