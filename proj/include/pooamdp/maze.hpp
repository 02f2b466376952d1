#pragma once

#include <map>
#include <string>
#include <vector>

#include "pooamdp/problem.hpp"

namespace pooamdp {

class GridParseError : public std::runtime_error {
 public:
  GridParseError(int line, int column, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + what),
        line(line),
        column(column) {}

  int line;
  int column;
};

enum class CellType { wall, visible, hidden };

struct GridSpec {
  int width = 0;
  int height = 0;
  std::vector<CellType> cells;  // row-major, row 0 = first grid line
  int start_x = 0, start_y = 0;
  bool start_hidden = false;
  std::vector<std::pair<int, int>> goal_cells;  // (x, y), index order
  int actual_goal_index = 0;
  double p_obs = 1.0;
  double gamma = 0.99;
  double tau = 0.01;
  double robs_weight = 0.0;
  Criterion criterion = Criterion::legibility;

  CellType cell(int x, int y) const {
    return cells[static_cast<size_t>(y) * static_cast<size_t>(width) +
                 static_cast<size_t>(x)];
  }
};

/// Grid file format: `key = value` header lines (p_obs, gamma, tau, criterion,
/// robs_weight, actual_goal), a blank line, then one row per line with
/// characters `#` wall, `.` visible, `~` hidden, `S`/`s` start
/// (visible/hidden), digits 1-9 goal cells in index order.
GridSpec parse_grid(const std::string& text);

/// Canonical rendering; render(parse(t)) == render(parse(render(parse(t)))).
std::string render_grid(const GridSpec& spec);

/// Maze actions, in index order.
enum MazeAction { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

PoOamdp build_problem(const GridSpec& spec);

/// Bundled benchmark grids, keyed by name.
std::map<std::string, GridSpec> bench_grids();

}  // namespace pooamdp
