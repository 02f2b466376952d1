#include "pooamdp/sim.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include <json.hpp>

namespace pooamdp {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename Entries>
int sample_index(const Entries& entries, double u) {
  double acc = 0.0;
  for (size_t k = 0; k < entries.size(); ++k) {
    acc += entries[k].second;
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(entries.size()) - 1;
}

}  // namespace

uint64_t substream_seed(uint64_t master, uint64_t index) {
  uint64_t z = master ^ (index * 0x9e3779b97f4a7c15ULL);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

TrajectoryRecord simulate(BeliefMdp& bm, const PolicyFn& policy, uint64_t seed,
                          int horizon_cap) {
  const PoOamdp& problem = bm.problem();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  TrajectoryRecord record;
  InfoState i = bm.initial_info_state();
  for (int t = 0; t < horizon_cap; ++t) {
    if (bm.is_terminal(i)) break;
    const int a = policy(bm, i, rng);

    const auto outs = problem.base.outcomes(i.s, a);
    std::vector<std::pair<int, double>> out_probs;
    out_probs.reserve(outs.size());
    for (const auto& out : outs) out_probs.emplace_back(out.next, out.prob);
    const int oi = sample_index(out_probs, unif(rng));
    const int s_next = outs[static_cast<size_t>(oi)].next;
    const double r_obs = outs[static_cast<size_t>(oi)].reward;

    const auto& obs_row = problem.obs_row(a, s_next);
    const int o = obs_row[static_cast<size_t>(sample_index(obs_row, unif(rng)))].first;

    Belief b_next = filter_step(problem, bm.model(), i.b, o);
    const TargetBelief beta = bm.target_of(i.b);
    const TargetBelief beta_next = bm.target_of(b_next);
    const double r_criterion =
        criterion_reward(problem, i.s, beta, a, s_next, beta_next);

    record.steps.push_back({t, i.s, a, o, i.b, beta, r_criterion, r_obs});
    i = InfoState{s_next, std::move(b_next)};
  }
  record.final_state = i.s;
  record.terminated = bm.is_terminal(i);
  record.horizon_cap_hit = !record.terminated;
  return record;
}

EvalReport evaluate(BeliefMdp& bm, const PolicyFn& policy, int n, uint64_t seed,
                    int horizon_cap) {
  if (n < 1) throw std::invalid_argument("evaluate: n must be >= 1");
  const double gamma = bm.problem().base.gamma();
  std::vector<double> rets_c(static_cast<size_t>(n));
  std::vector<double> rets_o(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const auto record =
        simulate(bm, policy, substream_seed(seed, static_cast<uint64_t>(k)),
                 horizon_cap);
    double ret_c = 0.0, ret_o = 0.0, disc = 1.0;
    for (const auto& step : record.steps) {
      ret_c += disc * step.r_criterion;
      ret_o += disc * step.r_obs;
      disc *= gamma;
    }
    rets_c[static_cast<size_t>(k)] = ret_c;
    rets_o[static_cast<size_t>(k)] = ret_o;
  }
  // Mean and centered (two-pass) sample variance.
  auto stats = [n](const std::vector<double>& rets) {
    double sum = 0.0;
    for (double r : rets) sum += r;
    const double mean = sum / n;
    double ss = 0.0;
    for (double r : rets) ss += (r - mean) * (r - mean);
    const double stderr_ = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
    return std::pair<double, double>(mean, stderr_);
  };
  EvalReport report;
  report.n_trajectories = n;
  report.seed = seed;
  std::tie(report.mean_return_criterion, report.std_error_criterion) =
      stats(rets_c);
  std::tie(report.mean_return_observer, report.std_error_observer) =
      stats(rets_o);
  return report;
}

void export_trajectory_csv(const TrajectoryRecord& record, std::ostream& out) {
  out << "t,state,action,observation,belief,target_belief,r_criterion,r_obs\n";
  for (const auto& step : record.steps) {
    out << step.t << ',' << step.state << ',' << step.action << ','
        << step.observation << ',';
    for (size_t k = 0; k < step.belief.probs.size(); ++k) {
      if (k) out << ';';
      out << step.belief.probs[k].first << ':' << fmt17(step.belief.probs[k].second);
    }
    out << ',';
    for (size_t k = 0; k < step.target.probs.size(); ++k) {
      if (k) out << '|';
      out << fmt17(step.target.probs[k]);
    }
    out << ',' << fmt17(step.r_criterion) << ',' << fmt17(step.r_obs) << '\n';
  }
}

void export_trajectory_json(const TrajectoryRecord& record, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["steps"] = nlohmann::ordered_json::array();
  for (const auto& step : record.steps) {
    nlohmann::ordered_json js;
    js["t"] = step.t;
    js["state"] = step.state;
    js["action"] = step.action;
    js["observation"] = step.observation;
    auto belief = nlohmann::ordered_json::array();
    for (const auto& [s, p] : step.belief.probs)
      belief.push_back(nlohmann::ordered_json::array({s, p}));
    js["belief"] = std::move(belief);
    js["target_belief"] = step.target.probs;
    js["r_criterion"] = step.r_criterion;
    js["r_obs"] = step.r_obs;
    doc["steps"].push_back(std::move(js));
  }
  doc["final_state"] = record.final_state;
  doc["terminated"] = record.terminated;
  doc["horizon_cap_hit"] = record.horizon_cap_hit;
  out << doc.dump(2) << '\n';
}

std::string eval_report_json(const EvalReport& report) {
  nlohmann::ordered_json doc;
  doc["mean_return_criterion"] = report.mean_return_criterion;
  doc["mean_return_observer"] = report.mean_return_observer;
  doc["std_error_criterion"] = report.std_error_criterion;
  doc["std_error_observer"] = report.std_error_observer;
  doc["n_trajectories"] = report.n_trajectories;
  doc["seed"] = report.seed;
  return doc.dump(2) + "\n";
}

}  // namespace pooamdp
