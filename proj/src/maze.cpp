#include "pooamdp/maze.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pooamdp {

namespace {

constexpr double kMoveReward = -0.01;
constexpr double kWallReward = -1.0;

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

GridSpec parse_grid(const std::string& text) {
  GridSpec spec;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;

  // Header: `key = value` lines until the first blank line.
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) break;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw GridParseError(line_no, 1, "expected `key = value` header line");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    try {
      if (key == "p_obs") spec.p_obs = std::stod(value);
      else if (key == "gamma") spec.gamma = std::stod(value);
      else if (key == "tau") spec.tau = std::stod(value);
      else if (key == "robs_weight") spec.robs_weight = std::stod(value);
      else if (key == "actual_goal") spec.actual_goal_index = std::stoi(value);
      else if (key == "criterion") spec.criterion = criterion_from_string(value);
      else throw GridParseError(line_no, 1, "unknown header key: " + key);
    } catch (const std::invalid_argument& e) {
      throw GridParseError(line_no, static_cast<int>(eq) + 2, e.what());
    }
  }

  // Grid rows.
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) break;
    rows.push_back(t);
  }
  if (rows.empty()) throw GridParseError(line_no, 1, "missing grid rows");
  spec.height = static_cast<int>(rows.size());
  spec.width = static_cast<int>(rows[0].size());
  const int header_lines = line_no - spec.height;
  spec.cells.assign(static_cast<size_t>(spec.width) *
                        static_cast<size_t>(spec.height),
                    CellType::wall);

  bool start_found = false;
  std::vector<std::pair<int, std::pair<int, int>>> goals;  // (digit, cell)
  for (int y = 0; y < spec.height; ++y) {
    const std::string& row = rows[static_cast<size_t>(y)];
    if (static_cast<int>(row.size()) != spec.width)
      throw GridParseError(header_lines + y + 1,
                           static_cast<int>(row.size()) + 1,
                           "ragged row: expected width " +
                               std::to_string(spec.width));
    for (int x = 0; x < spec.width; ++x) {
      const char c = row[static_cast<size_t>(x)];
      CellType type;
      switch (c) {
        case '#': type = CellType::wall; break;
        case '.': type = CellType::visible; break;
        case '~': type = CellType::hidden; break;
        case 'S':
        case 's':
          if (start_found)
            throw GridParseError(header_lines + y + 1, x + 1, "duplicate start");
          start_found = true;
          spec.start_x = x;
          spec.start_y = y;
          spec.start_hidden = (c == 's');
          type = c == 's' ? CellType::hidden : CellType::visible;
          break;
        default:
          if (c >= '1' && c <= '9') {
            goals.emplace_back(c - '0', std::make_pair(x, y));
            type = CellType::visible;  // goal cells emit their location
          } else {
            throw GridParseError(header_lines + y + 1, x + 1,
                                 std::string("malformed character `") + c + "`");
          }
      }
      spec.cells[static_cast<size_t>(y) * static_cast<size_t>(spec.width) +
                 static_cast<size_t>(x)] = type;
    }
  }
  if (!start_found) throw GridParseError(line_no, 1, "missing start cell");
  if (goals.empty()) throw GridParseError(line_no, 1, "missing goal cells");
  std::sort(goals.begin(), goals.end());
  for (size_t k = 0; k < goals.size(); ++k) {
    if (goals[k].first != static_cast<int>(k) + 1)
      throw GridParseError(line_no, 1, "goal digits must be 1..k without gaps");
    spec.goal_cells.push_back(goals[k].second);
  }

  if (spec.actual_goal_index < 0 ||
      spec.actual_goal_index >= static_cast<int>(spec.goal_cells.size()))
    throw GridParseError(1, 1, "actual_goal out of range");
  if ((spec.criterion == Criterion::action_pred ||
       spec.criterion == Criterion::state_pred) &&
      spec.goal_cells.size() != 1)
    throw GridParseError(1, 1, "predictability criteria require exactly one goal");
  if (spec.p_obs <= 0.0 || spec.p_obs > 1.0)
    throw GridParseError(1, 1, "p_obs must be in (0,1]");
  return spec;
}

std::string render_grid(const GridSpec& spec) {
  std::ostringstream out;
  out << "criterion = " << to_string(spec.criterion) << "\n";
  out << "actual_goal = " << spec.actual_goal_index << "\n";
  out << "p_obs = " << format_real(spec.p_obs) << "\n";
  out << "gamma = " << format_real(spec.gamma) << "\n";
  out << "tau = " << format_real(spec.tau) << "\n";
  out << "robs_weight = " << format_real(spec.robs_weight) << "\n";
  out << "\n";
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      char c;
      switch (spec.cell(x, y)) {
        case CellType::wall: c = '#'; break;
        case CellType::visible: c = '.'; break;
        case CellType::hidden: c = '~'; break;
        default: c = '?';
      }
      if (x == spec.start_x && y == spec.start_y)
        c = spec.start_hidden ? 's' : 'S';
      for (size_t k = 0; k < spec.goal_cells.size(); ++k)
        if (spec.goal_cells[k] == std::make_pair(x, y))
          c = static_cast<char>('1' + static_cast<int>(k));
      out << c;
    }
    out << "\n";
  }
  return out.str();
}

PoOamdp build_problem(const GridSpec& spec) {
  const int W = spec.width, H = spec.height;
  // Traversable positions, row-major.
  std::vector<int> pos_of_cell(static_cast<size_t>(W) * static_cast<size_t>(H), -1);
  std::vector<std::pair<int, int>> cell_of_pos;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      if (spec.cell(x, y) != CellType::wall) {
        pos_of_cell[static_cast<size_t>(y) * static_cast<size_t>(W) +
                    static_cast<size_t>(x)] = static_cast<int>(cell_of_pos.size());
        cell_of_pos.emplace_back(x, y);
      }
  const int P = static_cast<int>(cell_of_pos.size());
  const int num_goals = static_cast<int>(spec.goal_cells.size());
  const bool explic = spec.criterion == Criterion::explicability;
  const int num_hyps = explic ? num_goals + 1 : num_goals;  // psi0 last

  std::vector<int> goal_pos(static_cast<size_t>(num_goals));
  for (int g = 0; g < num_goals; ++g) {
    const auto [gx, gy] = spec.goal_cells[static_cast<size_t>(g)];
    goal_pos[static_cast<size_t>(g)] =
        pos_of_cell[static_cast<size_t>(gy) * static_cast<size_t>(W) +
                    static_cast<size_t>(gx)];
  }
  const int start_pos =
      pos_of_cell[static_cast<size_t>(spec.start_y) * static_cast<size_t>(W) +
                  static_cast<size_t>(spec.start_x)];

  const int S = num_hyps * P;
  const int A = 4;
  const int s0 = spec.actual_goal_index * P + start_pos;
  Mdp mdp(S, A, spec.gamma, s0);

  auto state_of = [P](int hyp, int pos) { return hyp * P + pos; };
  auto hyp_of = [P](int s) { return s / P; };
  auto pos_of = [P](int s) { return s % P; };

  for (int h = 0; h < num_hyps; ++h) {
    for (int p = 0; p < P; ++p) {
      const int s = state_of(h, p);
      if (h < num_goals && p == goal_pos[static_cast<size_t>(h)]) {
        mdp.set_terminal(s);
        continue;
      }
      const auto [x, y] = cell_of_pos[static_cast<size_t>(p)];
      const int dx[4] = {0, 0, -1, 1};
      const int dy[4] = {-1, 1, 0, 0};  // up, down, left, right
      for (int a = 0; a < A; ++a) {
        const int nx = x + dx[a], ny = y + dy[a];
        const bool blocked = nx < 0 || nx >= W || ny < 0 || ny >= H ||
                             spec.cell(nx, ny) == CellType::wall;
        if (blocked) {
          mdp.add_transition(s, a, s, 1.0, kWallReward);
        } else {
          const int np =
              pos_of_cell[static_cast<size_t>(ny) * static_cast<size_t>(W) +
                          static_cast<size_t>(nx)];
          mdp.add_transition(s, a, state_of(h, np), 1.0, kMoveReward);
        }
      }
    }
  }
  mdp.finalize();

  PoOamdp problem;
  problem.base = std::move(mdp);
  problem.criterion = spec.criterion;
  problem.tau = spec.tau;
  problem.robs_weight = spec.robs_weight;

  // Observations: one per observable position, plus `none` (last index).
  std::vector<int> obs_of_pos(static_cast<size_t>(P), -1);
  std::vector<std::string> obs_names;
  for (int p = 0; p < P; ++p) {
    const auto [x, y] = cell_of_pos[static_cast<size_t>(p)];
    if (spec.cell(x, y) == CellType::visible) {
      obs_of_pos[static_cast<size_t>(p)] = static_cast<int>(obs_names.size());
      obs_names.push_back(std::to_string(x) + "," + std::to_string(y));
    }
  }
  const int obs_none = static_cast<int>(obs_names.size());
  obs_names.push_back("none");
  problem.num_observations = obs_none + 1;
  problem.obs_names = obs_names;

  problem.obs_kernel.assign(static_cast<size_t>(A) * static_cast<size_t>(S), {});
  for (int a = 0; a < A; ++a) {
    for (int s2 = 0; s2 < S; ++s2) {
      auto& row = problem.obs_kernel[static_cast<size_t>(a) *
                                         static_cast<size_t>(S) +
                                     static_cast<size_t>(s2)];
      const int obs = obs_of_pos[static_cast<size_t>(pos_of(s2))];
      if (obs < 0) {
        row = {{obs_none, 1.0}};
      } else if (spec.p_obs >= 1.0) {
        row = {{obs, 1.0}};
      } else {
        row = {{obs, spec.p_obs}, {obs_none, 1.0 - spec.p_obs}};
      }
    }
  }

  switch (spec.criterion) {
    case Criterion::legibility:
      problem.num_targets = num_goals;
      problem.target_map = [hyp_of](int s, int, int) { return hyp_of(s); };
      problem.state_target = [hyp_of](int s) { return hyp_of(s); };
      for (int g = 0; g < num_goals; ++g)
        problem.target_names.push_back("goal" + std::to_string(g + 1));
      break;
    case Criterion::explicability:
      problem.num_targets = num_hyps;
      problem.target_map = [hyp_of](int s, int, int) { return hyp_of(s); };
      problem.state_target = [hyp_of](int s) { return hyp_of(s); };
      problem.psi0 = num_goals;
      problem.uniform_policy_states.assign(static_cast<size_t>(S), 0);
      for (int p = 0; p < P; ++p)
        problem.uniform_policy_states[static_cast<size_t>(
            state_of(num_goals, p))] = 1;
      for (int g = 0; g < num_goals; ++g)
        problem.target_names.push_back("goal" + std::to_string(g + 1));
      problem.target_names.push_back("psi0");
      break;
    case Criterion::action_pred:
      problem.num_targets = A;
      problem.target_map = [](int, int a, int) { return a; };
      problem.target_names = {"up", "down", "left", "right"};
      break;
    case Criterion::state_pred:
      problem.num_targets = P;
      problem.target_map = [pos_of](int, int, int s2) { return pos_of(s2); };
      for (int p = 0; p < P; ++p) {
        const auto [x, y] = cell_of_pos[static_cast<size_t>(p)];
        problem.target_names.push_back(std::to_string(x) + "," +
                                       std::to_string(y));
      }
      break;
    case Criterion::custom:
      throw std::invalid_argument("build_problem: custom criterion unsupported");
  }

  std::vector<std::pair<int, double>> b0;
  const double u = 1.0 / num_hyps;
  for (int h = 0; h < num_hyps; ++h) b0.emplace_back(state_of(h, start_pos), u);
  problem.initial_belief = Belief::make(std::move(b0));

  for (int h = 0; h < num_hyps; ++h) {
    const std::string tag =
        (explic && h == num_goals) ? "psi0" : "g" + std::to_string(h + 1);
    for (int p = 0; p < P; ++p) {
      const auto [x, y] = cell_of_pos[static_cast<size_t>(p)];
      problem.state_names.push_back(std::to_string(x) + "," +
                                    std::to_string(y) + ":" + tag);
    }
  }

  problem.validate();
  return problem;
}

namespace {

GridSpec make_spec(const std::string& grid, Criterion criterion, int actual_goal,
                   double p_obs, double robs_weight) {
  std::ostringstream text;
  text << "criterion = " << to_string(criterion) << "\n"
       << "actual_goal = " << actual_goal << "\n"
       << "p_obs = " << format_real(p_obs) << "\n"
       << "robs_weight = " << format_real(robs_weight) << "\n\n"
       << grid;
  return parse_grid(text.str());
}

}  // namespace

std::map<std::string, GridSpec> bench_grids() {
  // Open space, 3 goals on the top row, one visible row the agent can exploit.
  const std::string leg_main =
      "~1~2~3~\n"
      "~~~~~~~\n"
      ".......\n"
      "~~~~~~~\n"
      "~~~~~~~\n"
      "~~~~~~~\n"
      "~~~s~~~\n";
  // Two paths toward the left goal; the longer right path has more visible
  // cells.
  const std::string leg_stoch =
      "~1~~2\n"
      "~~#.~\n"
      "~.#~~\n"
      "~~#.~\n"
      "~~#~~\n"
      "~~s~~\n";
  // Hidden corridors around an open room; three observable cells, one of them
  // the goal.
  const std::string pred_main =
      "~~~.~~\n"
      "s~~~~~\n"
      "~~~~~~\n"
      "~~~~~~\n"
      "~~~~~~\n"
      "~####~\n"
      "~####~\n"
      "~####~\n"
      "~1~.~~\n"
      "~~~~~~\n";
  // Smaller variants (no open room, shorter paths).
  const std::string leg_small =
      "1~2~3\n"
      "~~~~~\n"
      ".....\n"
      "~~~~~\n"
      "~~s~~\n";
  const std::string pred_small =
      "s~~.~\n"
      "####~\n"
      "~~~~~\n"
      "~####\n"
      "~~1~~\n";

  std::map<std::string, GridSpec> grids;
  grids["legibility_main_left"] =
      make_spec(leg_main, Criterion::legibility, 0, 1.0, 1.0);
  grids["legibility_main_middle"] =
      make_spec(leg_main, Criterion::legibility, 1, 1.0, 1.0);
  grids["legibility_stochastic"] =
      make_spec(leg_stoch, Criterion::legibility, 0, 0.5, 1.0);
  grids["explicability_main"] =
      make_spec(leg_main, Criterion::explicability, 0, 1.0, 0.0);
  grids["predictability_action_main"] =
      make_spec(pred_main, Criterion::action_pred, 0, 1.0, 1.0);
  grids["predictability_state_main"] =
      make_spec(pred_main, Criterion::state_pred, 0, 1.0, 0.0);
  grids["legibility_small"] =
      make_spec(leg_small, Criterion::legibility, 0, 1.0, 1.0);
  grids["explicability_small"] =
      make_spec(leg_small, Criterion::explicability, 0, 1.0, 0.0);
  grids["predictability_action_small"] =
      make_spec(pred_small, Criterion::action_pred, 0, 1.0, 1.0);
  grids["predictability_state_small"] =
      make_spec(pred_small, Criterion::state_pred, 0, 1.0, 0.0);
  return grids;
}

}  // namespace pooamdp
