#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "stratlink/planners.hpp"

namespace stratlink {

// '#' wall, '.' floor, 'S' start, 'T' target, 'a'-'e' keys, 'A'-'E' doors.
// State id = cell * 2^keys + flags; actions are up, down, left, right.
struct GridWorld {
  enum Action : ActionId { up = 0, down = 1, left = 2, right = 3 };

  std::size_t width = 0, height = 0;
  std::vector<std::string> rows;
  std::string keys;  // distinct key letters, sorted; bit k of flags is keys[k]
  std::vector<std::pair<int, int>> cells;  // (row, col) of each open cell
  std::vector<int> cell_at;                // row * width + col -> cell id or -1

  Environment env;
  RewardTable reward;
  DecisionClasses classes;  // by cell, ignoring flags
  std::vector<bool> terminal;

  std::size_t flag_count() const { return std::size_t{1} << keys.size(); }
  StateId state(std::size_t cell, unsigned flags) const { return cell * flag_count() + flags; }
  std::size_t cell_of(StateId s) const { return s / flag_count(); }
  unsigned flags_of(StateId s) const { return static_cast<unsigned>(s % flag_count()); }
  char tile(std::size_t cell) const;
  std::size_t horizon_cap() const { return 4 * width * height; }
  TrajectoryOptions trajectory_options() const { return {horizon_cap(), terminal, {}}; }
};

struct LayoutError : InputError {
  using InputError::InputError;
};

GridWorld parse_gridworld(std::string_view text);
GridWorld load_gridworld(const std::string& path);

}  // namespace stratlink
