#pragma once

#include <cstdint>
#include <vector>

#include "stratlink/planners.hpp"

namespace stratlink {

// Nodes and preparations are 1-based, as in the environment description.
struct Shortcut {
  int from = 1;
  int to = 2;
  std::vector<int> required;  // sorted prep ids
  friend bool operator==(const Shortcut&, const Shortcut&) = default;
};

struct ShortcutsSpec {
  int nodes = 10;   // N
  int preps = 5;    // J
  double cost = 0.1;  // C
  std::vector<Shortcut> shortcuts;
  std::vector<int> prep_nodes;  // n_prep_j, all 1

  int shortcut_count() const { return static_cast<int>(shortcuts.size()); }
  void validate() const;
  friend bool operator==(const ShortcutsSpec&, const ShortcutsSpec&) = default;
};

// Actions: 0 = move, 1..I = jump_i, I+1..I+J = prep_j.
// State id = (node - 1) * 2^J + flags, bit j-1 of flags set once prep_j was taken.
struct Shortcuts {
  ShortcutsSpec spec;
  Environment env;
  RewardTable reward;
  DecisionClasses classes;  // by node, ignoring flags
  std::vector<bool> terminal;

  std::size_t flag_count() const { return std::size_t{1} << spec.preps; }
  StateId state(int node, unsigned flags) const {
    return static_cast<StateId>(node - 1) * flag_count() + flags;
  }
  int node_of(StateId s) const { return static_cast<int>(s / flag_count()) + 1; }
  unsigned flags_of(StateId s) const { return static_cast<unsigned>(s % flag_count()); }
  static ActionId move() { return 0; }
  ActionId jump(int i) const { return static_cast<ActionId>(i); }
  ActionId prep(int j) const { return static_cast<ActionId>(spec.shortcut_count() + j); }
  bool is_prep(ActionId a) const { return a > static_cast<ActionId>(spec.shortcut_count()); }
  int prep_index(ActionId a) const { return static_cast<int>(a) - spec.shortcut_count(); }
  StateId initial_state() const { return state(1, 0); }
  // Long enough to reach node N along any route.
  std::size_t horizon_cap() const { return static_cast<std::size_t>(spec.nodes + spec.preps) * 4; }
  TrajectoryOptions trajectory_options() const { return {horizon_cap(), terminal, {}}; }
};

double shortcuts_reward(const ShortcutsSpec& spec, int node, unsigned flags, ActionId action);
Shortcuts build_shortcuts(const ShortcutsSpec& spec);
ShortcutsSpec generate_shortcuts_spec(int N, int I, int J, double C, std::uint64_t seed);
Shortcuts generate_shortcuts(int N, int I, int J, double C, std::uint64_t seed);

}  // namespace stratlink
