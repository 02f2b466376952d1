#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>

#include "pooamdp/belief_mdp.hpp"

namespace pooamdp {

/// Decision rule; stochastic policies draw from the trajectory's stream.
using PolicyFn = std::function<int(BeliefMdp&, const InfoState&, std::mt19937_64&)>;

struct TrajectoryStep {
  int t = 0;
  int state = 0;
  int action = 0;
  int observation = 0;
  Belief belief;        // observer belief the action was chosen under
  TargetBelief target;  // beta derived from `belief`
  double r_criterion = 0.0;
  double r_obs = 0.0;
};

struct TrajectoryRecord {
  std::vector<TrajectoryStep> steps;
  int final_state = 0;
  bool terminated = false;
  bool horizon_cap_hit = false;
};

struct EvalReport {
  double mean_return_criterion = 0.0;
  double mean_return_observer = 0.0;
  double std_error_criterion = 0.0;
  double std_error_observer = 0.0;
  int n_trajectories = 0;
  uint64_t seed = 0;
};

/// Samples one trajectory on the true dynamics with a deterministic per-seed
/// random stream, tracking the observer's belief via filter_step.
TrajectoryRecord simulate(BeliefMdp& bm, const PolicyFn& policy, uint64_t seed,
                          int horizon_cap = 3000);

/// Monte Carlo estimate of the discounted criterion and observer returns over
/// n trajectories with seeds derived deterministically from the master seed.
EvalReport evaluate(BeliefMdp& bm, const PolicyFn& policy, int n, uint64_t seed,
                    int horizon_cap = 3000);

void export_trajectory_csv(const TrajectoryRecord& record, std::ostream& out);
void export_trajectory_json(const TrajectoryRecord& record, std::ostream& out);
std::string eval_report_json(const EvalReport& report);

/// Seed for trajectory `index` under `master` (splitmix64 of master ^ index).
uint64_t substream_seed(uint64_t master, uint64_t index);

}  // namespace pooamdp
