// Command-line front end: solve benchmark or user grids, roll out policies,
// run Monte Carlo evaluations, and convert type-based observer-aware MDPs to
// the partially observable formulation.
//
// Exit codes: 0 success, 1 solver timeout, 2 invalid input, 3 policy artifact
// does not match the problem.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pooamdp/hsvi.hpp"
#include "pooamdp/maze.hpp"
#include "pooamdp/oamdp.hpp"
#include "pooamdp/sim.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace pooamdp;

namespace {

class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

class ArtifactMismatch : public std::runtime_error {
 public:
  explicit ArtifactMismatch(const std::string& what)
      : std::runtime_error(what) {}
};

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

uint64_t fnv1a64(const std::string& data) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << data;
}

// ---------------------------------------------------------------------------
// Problem loading

struct GridOverrides {
  std::string criterion;
  double gamma = 0.99, tau = 0.01, p_obs = 1.0, robs_weight = 0.0;
  bool has_criterion = false, has_gamma = false, has_tau = false,
       has_p_obs = false, has_robs = false;
};

GridSpec load_grid(const std::string& name_or_path, const GridOverrides& ov) {
  GridSpec spec;
  auto grids = bench_grids();
  if (auto it = grids.find(name_or_path); it != grids.end()) {
    spec = it->second;
  } else {
    try {
      spec = parse_grid(read_file(name_or_path));
    } catch (const GridParseError& e) {
      throw InputError(name_or_path + ": " + e.what());
    }
  }
  if (ov.has_criterion) spec.criterion = criterion_from_string(ov.criterion);
  if (ov.has_gamma) spec.gamma = ov.gamma;
  if (ov.has_tau) spec.tau = ov.tau;
  if (ov.has_p_obs) spec.p_obs = ov.p_obs;
  if (ov.has_robs) spec.robs_weight = ov.robs_weight;
  if (spec.gamma <= 0.0 || spec.gamma > 1.0)
    throw InputError("gamma must lie in (0, 1]");
  if (spec.p_obs <= 0.0 || spec.p_obs > 1.0)
    throw InputError("p_obs must lie in (0, 1]");
  return spec;
}

std::string problem_digest(const GridSpec& spec, double eps_vi) {
  return hex64(fnv1a64(render_grid(spec) + "|eps_vi=" + fmt17(eps_vi)));
}

// ---------------------------------------------------------------------------
// Policy artifact serialization

json key_to_json(const InfoKey& key) {
  json b = json::array();
  for (const auto& [s, q] : key.b) b.push_back({s, q});
  return json{{"s", key.s}, {"b", std::move(b)}};
}

json bound_table_json(const BoundTable& table) {
  std::vector<const InfoKey*> keys;
  keys.reserve(table.stored.size());
  for (const auto& [k, v] : table.stored) keys.push_back(&k);
  std::sort(keys.begin(), keys.end(),
            [](const InfoKey* a, const InfoKey* b) {
              return std::tie(a->s, a->b) < std::tie(b->s, b->b);
            });
  json entries = json::array();
  for (const InfoKey* k : keys) {
    json e = key_to_json(*k);
    e["v"] = table.stored.at(*k);
    entries.push_back(std::move(e));
  }
  return entries;
}

json policy_artifact_json(const std::string& digest, const HsviConfig& config,
                          const SolveResult& result,
                          const CombinedInitData* init_data,
                          double naive_lower_const) {
  json doc;
  doc["format"] = "pooamdp-policy-v1";
  doc["problem_digest"] = digest;
  doc["init_mode"] =
      config.init_mode == HsviConfig::Init::naive ? "naive" : "combined";
  doc["combined_policy"] =
      config.combined_policy == HsviConfig::CombinedPolicy::pi_obs
          ? "pi_obs"
          : "pi_star_s";
  doc["epsilon"] = config.epsilon;
  doc["root_gap"] = result.root_gap;
  doc["trajectories"] = result.trajectories_explored;
  doc["converged"] = !result.timed_out;
  if (config.init_mode == HsviConfig::Init::naive) {
    doc["init"] = json{{"lower_const", naive_lower_const}};
  } else {
    doc["init"] = json{{"v_s_pi", init_data->v_s_pi},
                       {"v_cost_to_go", init_data->v_cost_to_go},
                       {"r_b_min", init_data->r_b_min}};
  }
  doc["lower"] = bound_table_json(result.lower);
  return doc;
}

BoundTable load_policy_artifact(const std::string& path,
                                const std::string& digest) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  if (doc.value("format", "") != "pooamdp-policy-v1")
    throw InputError(path + ": not a policy artifact");
  if (doc.value("problem_digest", "") != digest)
    throw ArtifactMismatch(path + ": policy was solved for a different problem (digest " +
                           doc.value("problem_digest", "?") + " vs " + digest + ")");
  BoundTable table;
  table.kind = BoundTable::Kind::lower;
  const json& init = doc.at("init");
  if (doc.at("init_mode") == "naive") {
    const double c = init.at("lower_const").get<double>();
    table.init = [c](const InfoState&) { return c; };
  } else {
    auto v_s = init.at("v_s_pi").get<std::vector<double>>();
    auto v_cost = init.at("v_cost_to_go").get<std::vector<double>>();
    const double r_b_min = init.at("r_b_min").get<double>();
    table.init = [v_s = std::move(v_s), v_cost = std::move(v_cost),
                  r_b_min](const InfoState& i) {
      double value = v_s[static_cast<size_t>(i.s)];
      for (const auto& [s, p] : i.b.probs)
        value += r_b_min * p * v_cost[static_cast<size_t>(s)];
      return value;
    };
  }
  for (const json& e : doc.at("lower")) {
    InfoKey key;
    key.s = e.at("s").get<int>();
    for (const json& pair : e.at("b"))
      key.b.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int64_t>());
    table.stored[key] = e.at("v").get<double>();
  }
  return table;
}

// ---------------------------------------------------------------------------
// Policies for rollouts

PolicyFn make_policy(const std::string& policy_spec, BeliefMdp& bm,
                     const std::string& digest) {
  if (policy_spec == "pi-obs") {
    return [](BeliefMdp& bm, const InfoState& i, std::mt19937_64& rng) {
      const auto& row = bm.model().pi_obs.probs[static_cast<size_t>(i.s)];
      double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      for (size_t a = 0; a + 1 < row.size(); ++a) {
        u -= row[a];
        if (u <= 0.0) return static_cast<int>(a);
      }
      return static_cast<int>(row.size()) - 1;
    };
  }
  if (policy_spec == "mdp-greedy") {
    const Mdp& base = bm.problem().base;
    SweepOptions opts;
    opts.epsilon = bm.problem().vi_epsilon;
    auto pi = greedy_policy(base, value_iteration(base, opts));
    return [pi = std::move(pi)](BeliefMdp&, const InfoState& i,
                                std::mt19937_64&) {
      const auto& row = pi.probs[static_cast<size_t>(i.s)];
      for (size_t a = 0; a < row.size(); ++a)
        if (row[a] > 0.5) return static_cast<int>(a);
      return 0;
    };
  }
  // Otherwise a path to a solved policy artifact.
  HsviPolicy policy(load_policy_artifact(policy_spec, digest));
  return [policy = std::move(policy)](BeliefMdp& bm, const InfoState& i,
                                      std::mt19937_64&) {
    return policy.action(bm, i);
  };
}

// ---------------------------------------------------------------------------
// Manifests

struct Manifest {
  std::string command;
  json inputs = json::object();
  json params = json::object();
  json outputs = json::object();
  double wall_time_secs = 0.0;
};

void add_output(Manifest& m, const fs::path& dir, const std::string& name,
                const std::string& data) {
  write_file(dir / name, data);
  m.outputs[name] = hex64(fnv1a64(data));
}

void write_manifest(const Manifest& m, const fs::path& dir) {
  json doc;
  doc["tool"] = "pooamdp";
  doc["command"] = m.command;
  doc["inputs"] = m.inputs;
  doc["params"] = m.params;
  doc["outputs"] = m.outputs;
  doc["timing"] = json{{"wall_time_secs", m.wall_time_secs}};
  write_file(dir / "manifest.json", doc.dump(2) + "\n");
}

json grid_params_json(const GridSpec& spec, double eps_vi) {
  return json{{"criterion", to_string(spec.criterion)},
              {"actual_goal", spec.actual_goal_index},
              {"gamma", spec.gamma},
              {"tau", spec.tau},
              {"p_obs", spec.p_obs},
              {"robs_weight", spec.robs_weight},
              {"eps_vi", eps_vi}};
}

// ---------------------------------------------------------------------------
// Subcommand bodies

struct CommonArgs {
  std::string grid;
  GridOverrides ov;
  double eps_vi = 1e-4;
  std::string out_dir = ".";
};

struct LoadedProblem {
  GridSpec spec;
  PoOamdp problem;
  ObserverModel model;
  std::string digest;
};

LoadedProblem load_problem(const CommonArgs& args) {
  LoadedProblem lp;
  lp.spec = load_grid(args.grid, args.ov);
  lp.problem = build_problem(lp.spec);
  lp.problem.vi_epsilon = args.eps_vi;
  lp.problem.validate();
  lp.model = build_observer_model(lp.problem);
  lp.digest = problem_digest(lp.spec, args.eps_vi);
  return lp;
}

int cmd_solve(const CommonArgs& args, const HsviConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  LoadedProblem lp = load_problem(args);
  BeliefMdp bm(lp.problem, lp.model);
  const InfoState i0 = bm.initial_info_state();

  CombinedInitData init_data;
  double naive_lower_const = 0.0;
  if (config.init_mode == HsviConfig::Init::naive) {
    auto [lower, upper] = init_naive(lp.problem, lp.model);
    naive_lower_const = lower.init(i0);
    (void)upper;
  } else {
    init_combined(lp.problem, lp.model, config.combined_policy, &init_data);
  }

  SolveResult result = solve(bm, config);
  const double lower0 = result.lower.value(lp.problem, i0);
  const double upper0 = result.upper.value(lp.problem, i0);

  fs::create_directories(args.out_dir);
  Manifest m;
  m.command = "solve";
  m.inputs["grid"] = json{{"name", args.grid}, {"digest", lp.digest}};
  m.params = grid_params_json(lp.spec, args.eps_vi);
  m.params["eps_hsvi"] = config.epsilon;
  m.params["timeout_secs"] = config.timeout_secs;
  m.params["init"] =
      config.init_mode == HsviConfig::Init::naive ? "naive" : "combined";
  m.params["combined_policy"] =
      config.combined_policy == HsviConfig::CombinedPolicy::pi_obs
          ? "pi_obs"
          : "pi_star_s";

  json bounds;
  bounds["problem_digest"] = lp.digest;
  bounds["lower"] = lower0;
  bounds["upper"] = upper0;
  bounds["gap"] = result.root_gap;
  bounds["trajectories"] = result.trajectories_explored;
  bounds["converged"] = !result.timed_out;
  add_output(m, args.out_dir, "bounds.json", bounds.dump(2) + "\n");

  json policy = policy_artifact_json(lp.digest, config, result,
                                     &init_data, naive_lower_const);
  add_output(m, args.out_dir, "policy.json", policy.dump(2) + "\n");

  std::ostringstream gap_csv;
  gap_csv << "seconds,upper,lower\n";
  for (const auto& e : result.gap_log)
    gap_csv << fmt17(e.seconds) << ',' << fmt17(e.upper) << ','
            << fmt17(e.lower) << '\n';
  add_output(m, args.out_dir, "gap_log.csv", gap_csv.str());

  m.wall_time_secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  write_manifest(m, args.out_dir);

  std::cout << "lower " << fmt17(lower0) << "  upper " << fmt17(upper0)
            << "  gap " << fmt17(result.root_gap) << "  trials "
            << result.trajectories_explored
            << (result.timed_out ? "  (timeout)" : "") << "\n";
  return result.timed_out ? 1 : 0;
}

int cmd_simulate(const CommonArgs& args, const std::string& policy_spec,
                 uint64_t seed, int horizon_cap, const std::string& format) {
  const auto start = std::chrono::steady_clock::now();
  LoadedProblem lp = load_problem(args);
  BeliefMdp bm(lp.problem, lp.model);
  PolicyFn policy = make_policy(policy_spec, bm, lp.digest);

  TrajectoryRecord record = simulate(bm, policy, seed, horizon_cap);

  fs::create_directories(args.out_dir);
  Manifest m;
  m.command = "simulate";
  m.inputs["grid"] = json{{"name", args.grid}, {"digest", lp.digest}};
  m.params = grid_params_json(lp.spec, args.eps_vi);
  m.params["policy"] = policy_spec;
  m.params["seed"] = seed;
  m.params["horizon_cap"] = horizon_cap;

  std::ostringstream out;
  if (format == "csv") {
    export_trajectory_csv(record, out);
    add_output(m, args.out_dir, "trajectory.csv", out.str());
  } else {
    export_trajectory_json(record, out);
    add_output(m, args.out_dir, "trajectory.json", out.str());
  }
  m.wall_time_secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  write_manifest(m, args.out_dir);

  std::cout << "steps " << record.steps.size() << "  terminated "
            << (record.terminated ? "yes" : "no") << "\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& policy_spec,
                 uint64_t seed, int n_traj, int horizon_cap) {
  const auto start = std::chrono::steady_clock::now();
  LoadedProblem lp = load_problem(args);
  BeliefMdp bm(lp.problem, lp.model);
  PolicyFn policy = make_policy(policy_spec, bm, lp.digest);

  EvalReport report = evaluate(bm, policy, n_traj, seed, horizon_cap);

  fs::create_directories(args.out_dir);
  Manifest m;
  m.command = "evaluate";
  m.inputs["grid"] = json{{"name", args.grid}, {"digest", lp.digest}};
  m.params = grid_params_json(lp.spec, args.eps_vi);
  m.params["policy"] = policy_spec;
  m.params["seed"] = seed;
  m.params["n_traj"] = n_traj;
  m.params["horizon_cap"] = horizon_cap;
  add_output(m, args.out_dir, "eval.json", eval_report_json(report));
  m.wall_time_secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  write_manifest(m, args.out_dir);

  std::cout << "criterion " << fmt17(report.mean_return_criterion) << " +- "
            << fmt17(report.std_error_criterion) << "  observer "
            << fmt17(report.mean_return_observer) << " +- "
            << fmt17(report.std_error_observer) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// convert: type-based OAMDP (JSON) -> product PO-OAMDP (JSON)

Mdp mdp_from_json(const json& doc, int num_states, int num_actions,
                  double gamma, int initial_state) {
  Mdp mdp(num_states, num_actions, gamma, initial_state);
  for (const json& t : doc.at("transitions")) {
    const double reward = t.size() > 4 ? t.at(4).get<double>() : 0.0;
    mdp.add_transition(t.at(0).get<int>(), t.at(1).get<int>(),
                       t.at(2).get<int>(), t.at(3).get<double>(), reward);
  }
  if (doc.contains("terminals"))
    for (const json& s : doc.at("terminals")) mdp.set_terminal(s.get<int>());
  mdp.finalize();
  return mdp;
}

Oamdp oamdp_from_json(const json& doc) {
  Oamdp oamdp;
  const int num_states = doc.at("num_states").get<int>();
  const int num_actions = doc.at("num_actions").get<int>();
  const double gamma = doc.at("gamma").get<double>();
  const int initial_state = doc.at("initial_state").get<int>();
  oamdp.base = mdp_from_json(doc, num_states, num_actions, gamma, initial_state);
  for (const json& type : doc.at("types"))
    oamdp.per_type.push_back(
        mdp_from_json(type, num_states, num_actions, gamma, initial_state));
  oamdp.tau = doc.value("tau", 0.01);
  oamdp.vi_epsilon = doc.value("vi_epsilon", 1e-4);
  if (doc.contains("prior"))
    oamdp.type_prior = doc.at("prior").get<std::vector<double>>();

  const json& rw = doc.at("agent_reward");
  const std::string kind = rw.at("kind").get<std::string>();
  const int num_types = oamdp.num_types();
  if (kind == "linear") {
    // R_ag(s, a, beta) = weights . beta + constant.
    auto weights = rw.at("weights").get<std::vector<double>>();
    const double constant = rw.value("constant", 0.0);
    if (static_cast<int>(weights.size()) != num_types)
      throw InputError("agent_reward.weights must have one entry per type");
    double lo = weights[0], hi = weights[0];
    for (double w : weights) lo = std::min(lo, w), hi = std::max(hi, w);
    oamdp.agent_reward_min = lo + constant;
    oamdp.agent_reward_max = hi + constant;
    oamdp.agent_reward = [weights = std::move(weights), constant](
                             int, int, const std::vector<double>& beta) {
      double r = constant;
      for (size_t k = 0; k < weights.size(); ++k) r += weights[k] * beta[k];
      return r;
    };
  } else if (kind == "neg_l2_to_vertex") {
    // R_ag = -|| beta - e_k ||_2 for a designated type k.
    const int k = rw.at("type").get<int>();
    if (k < 0 || k >= num_types) throw InputError("agent_reward.type out of range");
    oamdp.agent_reward_min = -std::sqrt(2.0);
    oamdp.agent_reward_max = 0.0;
    oamdp.agent_reward = [k](int, int, const std::vector<double>& beta) {
      double d2 = 0.0;
      for (size_t j = 0; j < beta.size(); ++j) {
        const double diff = beta[j] - (static_cast<int>(j) == k ? 1.0 : 0.0);
        d2 += diff * diff;
      }
      return -std::sqrt(d2);
    };
  } else if (kind == "neg_mass") {
    // R_ag = -beta(k): discourage mass on a designated type.
    const int k = rw.at("type").get<int>();
    if (k < 0 || k >= num_types) throw InputError("agent_reward.type out of range");
    oamdp.agent_reward_min = -1.0;
    oamdp.agent_reward_max = 0.0;
    oamdp.agent_reward = [k](int, int, const std::vector<double>& beta) {
      return -beta[static_cast<size_t>(k)];
    };
  } else {
    throw InputError("unknown agent_reward.kind: " + kind);
  }
  oamdp.validate();
  return oamdp;
}

json problem_to_json(const PoOamdp& p) {
  json doc;
  doc["num_states"] = p.base.num_states();
  doc["num_actions"] = p.base.num_actions();
  doc["gamma"] = p.base.gamma();
  doc["initial_state"] = p.base.initial_state();
  doc["tau"] = p.tau;
  doc["criterion"] = to_string(p.criterion);
  doc["robs_weight"] = p.robs_weight;
  doc["num_targets"] = p.num_targets;
  doc["num_observations"] = p.num_observations;

  json terminals = json::array();
  for (int s = 0; s < p.base.num_states(); ++s)
    if (p.base.is_terminal(s)) terminals.push_back(s);
  doc["terminals"] = std::move(terminals);

  json transitions = json::array();
  for (int s = 0; s < p.base.num_states(); ++s) {
    if (p.base.is_terminal(s)) continue;
    for (int a = 0; a < p.base.num_actions(); ++a)
      for (const Outcome& o : p.base.outcomes(s, a))
        transitions.push_back({s, a, o.next, o.prob, o.reward});
  }
  doc["transitions"] = std::move(transitions);

  json obs = json::array();
  for (int a = 0; a < p.base.num_actions(); ++a)
    for (int s2 = 0; s2 < p.base.num_states(); ++s2)
      for (const auto& [o, prob] : p.obs_row(a, s2))
        obs.push_back({a, s2, o, prob});
  doc["observations"] = std::move(obs);

  json belief = json::array();
  for (const auto& [s, prob] : p.initial_belief.probs)
    belief.push_back({s, prob});
  doc["initial_belief"] = std::move(belief);

  doc["state_names"] = p.state_names;
  doc["target_names"] = p.target_names;
  return doc;
}

int cmd_convert(const std::string& in_path, const std::string& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  json doc;
  try {
    doc = json::parse(read_file(in_path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(in_path + ": " + e.what());
  }
  Oamdp oamdp;
  try {
    oamdp = oamdp_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(in_path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(in_path + ": " + e.what());
  }
  PoOamdp problem = convert(oamdp);
  problem.validate();

  fs::create_directories(out_dir);
  Manifest m;
  m.command = "convert";
  const std::string input_bytes = read_file(in_path);
  m.inputs["oamdp"] = json{{"name", in_path}, {"digest", hex64(fnv1a64(input_bytes))}};
  m.params = json{{"num_types", oamdp.num_types()},
                  {"tau", oamdp.tau},
                  {"gamma", oamdp.base.gamma()}};
  add_output(m, out_dir, "problem.json", problem_to_json(problem).dump(2) + "\n");
  m.wall_time_secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  write_manifest(m, out_dir);

  std::cout << "product states " << problem.base.num_states() << "  targets "
            << problem.num_targets << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solver toolkit for observer-aware MDPs under partial observability"};
  app.require_subcommand(1);
  app.set_config("--config");

  CommonArgs common;
  HsviConfig hsvi_config;
  std::string policy_spec = "pi-obs";
  std::string format = "csv";
  std::string init_name = "combined";
  std::string combined_policy_name = "pi-obs";
  std::string convert_in;
  uint64_t seed = 0;
  int n_traj = 1000;
  int horizon_cap = 3000;

  auto add_problem_flags = [&](CLI::App* cmd) {
    cmd->add_option("grid", common.grid,
                    "Grid file path or built-in benchmark name")
        ->required();
    cmd->add_option("--criterion", common.ov.criterion,
                    "legibility|explicability|action-pred|state-pred");
    cmd->add_option("--gamma", common.ov.gamma, "Discount factor");
    cmd->add_option("--tau", common.ov.tau, "Observer softmax temperature");
    cmd->add_option("--pobs", common.ov.p_obs,
                    "Emission probability of visible cells");
    cmd->add_option("--robs-weight", common.ov.robs_weight,
                    "Weight of the observer reward in the agent reward");
    cmd->add_option("--eps-vi", common.eps_vi, "Value iteration accuracy");
    cmd->add_option("--out", common.out_dir, "Output directory");
  };

  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve a problem with heuristic search");
  add_problem_flags(solve_cmd);
  solve_cmd->add_option("--eps-hsvi", hsvi_config.epsilon, "Target root gap");
  solve_cmd->add_option("--timeout-secs", hsvi_config.timeout_secs, "Wall clock budget");
  solve_cmd->add_option("--init", init_name, "Bound initialization: naive|combined");
  solve_cmd->add_option("--combined-policy", combined_policy_name,
                        "Policy for the combined lower bound: pi-obs|pi-star");

  CLI::App* sim_cmd = app.add_subcommand("simulate", "Roll out one trajectory");
  add_problem_flags(sim_cmd);
  sim_cmd->add_option("--policy", policy_spec,
                      "pi-obs | mdp-greedy | path to policy.json");
  sim_cmd->add_option("--seed", seed, "Random seed");
  sim_cmd->add_option("--horizon-cap", horizon_cap, "Maximum trajectory length");
  sim_cmd->add_option("--format", format, "csv|json");

  CLI::App* eval_cmd = app.add_subcommand("evaluate", "Monte Carlo policy evaluation");
  add_problem_flags(eval_cmd);
  eval_cmd->add_option("--policy", policy_spec,
                       "pi-obs | mdp-greedy | path to policy.json");
  eval_cmd->add_option("--seed", seed, "Master random seed");
  eval_cmd->add_option("--n-traj", n_traj, "Number of trajectories");
  eval_cmd->add_option("--horizon-cap", horizon_cap, "Maximum trajectory length");

  CLI::App* convert_cmd = app.add_subcommand(
      "convert", "Convert a type-based observer-aware MDP (JSON) to the "
                 "partially observable product form");
  convert_cmd->add_option("input", convert_in, "OAMDP description (JSON)")
      ->required();
  convert_cmd->add_option("--out", common.out_dir, "Output directory");

  CLI::App* grids_cmd = app.add_subcommand("grids", "List built-in benchmark grids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  for (CLI::App* cmd : {solve_cmd, sim_cmd, eval_cmd}) {
    if (!cmd->parsed()) continue;
    common.ov.has_criterion = cmd->count("--criterion") > 0;
    common.ov.has_gamma = cmd->count("--gamma") > 0;
    common.ov.has_tau = cmd->count("--tau") > 0;
    common.ov.has_p_obs = cmd->count("--pobs") > 0;
    common.ov.has_robs = cmd->count("--robs-weight") > 0;
  }

  try {
    if (grids_cmd->parsed()) {
      for (const auto& [name, spec] : bench_grids())
        std::cout << name << "\n";
      return 0;
    }
    if (solve_cmd->parsed()) {
      if (init_name == "naive") {
        hsvi_config.init_mode = HsviConfig::Init::naive;
      } else if (init_name == "combined") {
        hsvi_config.init_mode = HsviConfig::Init::combined;
      } else {
        throw InputError("unknown --init: " + init_name);
      }
      if (combined_policy_name == "pi-obs") {
        hsvi_config.combined_policy = HsviConfig::CombinedPolicy::pi_obs;
      } else if (combined_policy_name == "pi-star") {
        hsvi_config.combined_policy = HsviConfig::CombinedPolicy::pi_star_s;
      } else {
        throw InputError("unknown --combined-policy: " + combined_policy_name);
      }
      return cmd_solve(common, hsvi_config);
    }
    if (sim_cmd->parsed()) {
      if (format != "csv" && format != "json")
        throw InputError("unknown --format: " + format);
      return cmd_simulate(common, policy_spec, seed, horizon_cap, format);
    }
    if (eval_cmd->parsed())
      return cmd_evaluate(common, policy_spec, seed, n_traj, horizon_cap);
    if (convert_cmd->parsed()) return cmd_convert(convert_in, common.out_dir);
  } catch (const ArtifactMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const GridParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
