#include <set>

#include "doctest.h"
#include "pooamdp/maze.hpp"

using namespace pooamdp;

namespace {

const char* kSample =
    "criterion = legibility\n"
    "actual_goal = 1\n"
    "p_obs = 0.5\n"
    "gamma = 0.95\n"
    "tau = 0.02\n"
    "robs_weight = 1\n"
    "\n"
    "1~2\n"
    "~#.\n"
    "~s~\n";

int find_state(const PoOamdp& p, const std::string& name) {
  for (size_t s = 0; s < p.state_names.size(); ++s)
    if (p.state_names[s] == name) return static_cast<int>(s);
  return -1;
}

int find_obs(const PoOamdp& p, const std::string& name) {
  for (size_t o = 0; o < p.obs_names.size(); ++o)
    if (p.obs_names[o] == name) return static_cast<int>(o);
  return -1;
}

}  // namespace

TEST_CASE("parse reads headers, cells, start, and goals") {
  GridSpec spec = parse_grid(kSample);
  CHECK(spec.width == 3);
  CHECK(spec.height == 3);
  CHECK(spec.p_obs == 0.5);
  CHECK(spec.gamma == 0.95);
  CHECK(spec.tau == 0.02);
  CHECK(spec.robs_weight == 1.0);
  CHECK(spec.actual_goal_index == 1);
  CHECK(spec.criterion == Criterion::legibility);
  CHECK(spec.start_x == 1);
  CHECK(spec.start_y == 2);
  CHECK(spec.start_hidden);
  REQUIRE(spec.goal_cells.size() == 2);
  CHECK(spec.goal_cells[0] == std::make_pair(0, 0));
  CHECK(spec.goal_cells[1] == std::make_pair(2, 0));
  CHECK(spec.cell(1, 1) == CellType::wall);
  CHECK(spec.cell(2, 1) == CellType::visible);
  CHECK(spec.cell(0, 1) == CellType::hidden);
  CHECK(spec.cell(0, 0) == CellType::visible);  // goals emit their location
}

TEST_CASE("render/parse round trip is stable") {
  const std::string once = render_grid(parse_grid(kSample));
  CHECK(render_grid(parse_grid(once)) == once);
  GridSpec again = parse_grid(once);
  CHECK(again.p_obs == 0.5);
  CHECK(again.actual_goal_index == 1);
  CHECK(again.start_hidden);
}

TEST_CASE("parse errors carry line and column positions") {
  CHECK_THROWS_AS(parse_grid("criterion legibility\n\n1s\n"), GridParseError);
  // Malformed cell character.
  try {
    parse_grid("criterion = legibility\n\n1~s\n~x~\n");
    FAIL("expected GridParseError");
  } catch (const GridParseError& e) {
    CHECK(e.line == 4);
    CHECK(e.column == 2);
  }
  // Ragged row.
  CHECK_THROWS_AS(parse_grid("criterion = legibility\n\n1~s\n~~\n"),
                  GridParseError);
  // Duplicate start, missing start, missing goals.
  CHECK_THROWS_AS(parse_grid("criterion = legibility\n\n1ss\n"), GridParseError);
  CHECK_THROWS_AS(parse_grid("criterion = legibility\n\n1~~\n"), GridParseError);
  CHECK_THROWS_AS(parse_grid("criterion = legibility\n\ns~~\n"), GridParseError);
  // Goal digit gap (1 and 3 without 2).
  CHECK_THROWS_AS(parse_grid("criterion = legibility\n\n1~s~3\n"),
                  GridParseError);
  // actual_goal is a 0-based index into the goal list.
  CHECK_THROWS_AS(parse_grid("actual_goal = 2\n\n1~s~2\n"), GridParseError);
  CHECK_NOTHROW(parse_grid("actual_goal = 1\n\n1~s~2\n"));
  // Predictability grids must have exactly one goal.
  CHECK_THROWS_AS(parse_grid("criterion = action-pred\n\n1~s~2\n"),
                  GridParseError);
  CHECK_NOTHROW(parse_grid("criterion = action-pred\n\n1~s~~\n"));
  // p_obs range.
  CHECK_THROWS_AS(parse_grid("p_obs = 0\n\n1~s\n"), GridParseError);
  CHECK_THROWS_AS(parse_grid("p_obs = 1.5\n\n1~s\n"), GridParseError);
  // Unknown header key.
  CHECK_THROWS_AS(parse_grid("speed = 3\n\n1~s\n"), GridParseError);
}

TEST_CASE("built problem has maze dynamics and rewards") {
  PoOamdp p = build_problem(parse_grid(kSample));
  // 8 traversable cells x 2 goal hypotheses.
  CHECK(p.base.num_states() == 16);
  CHECK(p.base.num_actions() == 4);
  CHECK(p.base.gamma() == 0.95);
  CHECK(p.base.initial_state() == find_state(p, "1,2:g2"));

  const int s = find_state(p, "1,2:g1");
  REQUIRE(s >= 0);
  // Up from the start bumps the interior wall: self-loop, -1.
  {
    auto outs = p.base.outcomes(s, kUp);
    REQUIRE(outs.size() == 1);
    CHECK(outs[0].next == s);
    CHECK(outs[0].reward == -1.0);
  }
  // Down exits the grid: self-loop, -1.
  {
    auto outs = p.base.outcomes(s, kDown);
    REQUIRE(outs.size() == 1);
    CHECK(outs[0].next == s);
    CHECK(outs[0].reward == -1.0);
  }
  // Left is a plain move: -0.01, hypothesis preserved.
  {
    auto outs = p.base.outcomes(s, kLeft);
    REQUIRE(outs.size() == 1);
    CHECK(outs[0].next == find_state(p, "0,2:g1"));
    CHECK(outs[0].reward == -0.01);
  }

  // Goal cells are terminal only under their own hypothesis.
  CHECK(p.base.is_terminal(find_state(p, "0,0:g1")));
  CHECK_FALSE(p.base.is_terminal(find_state(p, "0,0:g2")));
  CHECK(p.base.is_terminal(find_state(p, "2,0:g2")));
  CHECK_FALSE(p.base.is_terminal(find_state(p, "2,0:g1")));
  // Terminal self-loops carry zero reward.
  {
    auto outs = p.base.outcomes(find_state(p, "0,0:g1"), kRight);
    REQUIRE(outs.size() == 1);
    CHECK(outs[0].reward == 0.0);
  }

  // Initial belief: uniform over hypotheses at the start cell.
  REQUIRE(p.initial_belief.probs.size() == 2);
  for (const auto& [state, prob] : p.initial_belief.probs) {
    CHECK(prob == doctest::Approx(0.5));
    CHECK(state % (p.base.num_states() / 2) ==
          find_state(p, "1,2:g1") % (p.base.num_states() / 2));
  }
}

TEST_CASE("observation kernel splits visible cells by p_obs") {
  PoOamdp p = build_problem(parse_grid(kSample));
  const int none = find_obs(p, "none");
  REQUIRE(none >= 0);
  CHECK(none == p.num_observations - 1);

  // Hidden cell: `none` with probability one.
  const int hidden = find_state(p, "0,1:g1");
  {
    const auto& row = p.obs_row(kUp, hidden);
    REQUIRE(row.size() == 1);
    CHECK(row[0].first == none);
    CHECK(row[0].second == 1.0);
  }
  // Visible cell with p_obs = 0.5: coordinates or `none`.
  const int visible = find_state(p, "2,1:g1");
  {
    const auto& row = p.obs_row(kUp, visible);
    REQUIRE(row.size() == 2);
    CHECK(row[0].first == find_obs(p, "2,1"));
    CHECK(row[0].second == doctest::Approx(0.5));
    CHECK(row[1].first == none);
    CHECK(row[1].second == doctest::Approx(0.5));
  }
  // p_obs = 1 collapses visible cells to a single deterministic observation.
  GridSpec sure = parse_grid(kSample);
  sure.p_obs = 1.0;
  PoOamdp p1 = build_problem(sure);
  const auto& row = p1.obs_row(kUp, find_state(p1, "2,1:g1"));
  REQUIRE(row.size() == 1);
  CHECK(row[0].second == 1.0);
}

TEST_CASE("criterion wiring per grid type") {
  GridSpec leg = parse_grid(kSample);

  SUBCASE("legibility targets the goal hypothesis") {
    PoOamdp p = build_problem(leg);
    CHECK(p.num_targets == 2);
    const int s = find_state(p, "1,2:g2");
    CHECK(p.target_map(s, kUp, s) == 1);
    CHECK(p.state_target(s) == 1);
    CHECK(p.psi0 == -1);
    CHECK(p.uniform_policy_states.empty());
  }

  SUBCASE("explicability appends a random-behavior hypothesis") {
    GridSpec spec = leg;
    spec.criterion = Criterion::explicability;
    PoOamdp p = build_problem(spec);
    CHECK(p.num_targets == 3);
    CHECK(p.psi0 == 2);
    // One extra hypothesis block of states, all flagged uniform-policy.
    CHECK(p.base.num_states() == 24);
    int flagged = 0;
    for (char f : p.uniform_policy_states) flagged += f;
    CHECK(flagged == 8);
    const int s = find_state(p, "1,2:psi0");
    REQUIRE(s >= 0);
    CHECK(p.uniform_policy_states[static_cast<size_t>(s)] == 1);
    CHECK(p.target_map(s, kUp, s) == 2);
    // psi0 states never terminate.
    CHECK_FALSE(p.base.is_terminal(find_state(p, "0,0:psi0")));
    // Initial belief is uniform over all three hypotheses.
    CHECK(p.initial_belief.probs.size() == 3);
    CHECK(p.initial_belief.probs[0].second == doctest::Approx(1.0 / 3));
  }

  SUBCASE("action prediction targets the action taken") {
    PoOamdp p = build_problem(
        parse_grid("criterion = action-pred\n\n1~s~~\n"));
    CHECK(p.num_targets == 4);
    CHECK(p.target_map(0, kLeft, 0) == kLeft);
    CHECK(p.target_names == std::vector<std::string>{"up", "down", "left",
                                                     "right"});
  }

  SUBCASE("state prediction targets the successor position") {
    PoOamdp p = build_problem(
        parse_grid("criterion = state-pred\n\n1~s~~\n"));
    CHECK(p.num_targets == 5);  // one per traversable cell
    const int s2 = find_state(p, "3,0:g1");
    CHECK(p.target_map(0, kRight, s2) == s2 % 5);
  }
}

TEST_CASE("bundled benchmark grids build and validate") {
  auto grids = bench_grids();
  const std::set<std::string> expected = {
      "legibility_main_left",       "legibility_main_middle",
      "legibility_stochastic",      "explicability_main",
      "predictability_action_main", "predictability_state_main",
      "legibility_small",           "explicability_small",
      "predictability_action_small", "predictability_state_small"};
  std::set<std::string> got;
  for (const auto& [name, spec] : grids) got.insert(name);
  CHECK(got == expected);

  for (const auto& [name, spec] : grids) {
    CAPTURE(name);
    // Round-trip through the text format.
    CHECK(render_grid(parse_grid(render_grid(spec))) == render_grid(spec));
    PoOamdp p = build_problem(spec);
    CHECK(p.base.num_states() > 0);
    ObserverModel m = build_observer_model(p);
    CHECK(m.pi_obs.probs.size() == static_cast<size_t>(p.base.num_states()));
  }

  CHECK(grids["legibility_stochastic"].p_obs == 0.5);
  CHECK(grids["legibility_main_middle"].actual_goal_index == 1);
  CHECK(grids["explicability_main"].robs_weight == 0.0);
}
