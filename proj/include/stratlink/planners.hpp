#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stratlink/mdp.hpp"

namespace stratlink {

// Forbidden (state, action) pairs. Construction rejects sets that forbid
// every action of some state.
class ConstraintSet {
 public:
  ConstraintSet() = default;
  ConstraintSet(std::vector<Decision> forbidden, std::size_t action_count);

  const std::vector<Decision>& forbidden() const { return forbidden_; }  // sorted, unique
  bool empty() const { return forbidden_.empty(); }
  bool contains(Decision d) const;

  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;
  friend auto operator<=>(const ConstraintSet&, const ConstraintSet&) = default;

 private:
  std::vector<Decision> forbidden_;
};

struct DecisionClass {
  std::size_t observable = 0;  // shared observable part of the member states
  ActionId action = 0;
  std::vector<Decision> members;
};

// Groups states by an observable id (GridWorld: the cell, ignoring key flags).
// The default-constructed map makes every state its own class.
class DecisionClasses {
 public:
  DecisionClasses() = default;
  explicit DecisionClasses(std::vector<std::size_t> observable);

  bool identity() const { return observable_.empty(); }
  std::size_t observable(StateId s) const { return identity() ? s : observable_[s]; }
  DecisionClass of(Decision d) const;
  const std::vector<std::size_t>& table() const { return observable_; }

 private:
  std::vector<std::size_t> observable_;
  std::vector<std::vector<StateId>> groups_;
};

// Forbid every member of d's decision class.
ConstraintSet class_constraint(const DecisionClasses& classes, Decision d,
                               std::size_t action_count);

RewardTable apply_constraint(const RewardTable& reward, const ConstraintSet& constraint);

Policy soft_value_iteration(const Environment& env, const RewardTable& reward,
                            const PlannerConfig& config);
Policy hard_value_iteration(const Environment& env, const RewardTable& reward,
                            const PlannerConfig& config);

// Boltzmann distribution (inverse temperature beta) over deterministic
// stationary policies, weighted by their exact expected return over
// `iterations` steps; returns the induced per-state action marginals.
// Exponential in the state count, so limited to tiny environments.
Policy stationary_enumeration(const Environment& env, const RewardTable& reward,
                              const PlannerConfig& config);

Policy plan(const Environment& env, const RewardTable& reward, const PlannerConfig& config);
Policy plan_constrained(const Environment& env, const RewardTable& reward,
                        const PlannerConfig& config, const ConstraintSet& constraint);

// States reachable from the support of sigma through transitions whose reward
// is not -inf. Pass no reward to follow every action.
std::vector<bool> reachable_states(const Environment& env, const RewardTable* reward = nullptr);

// States from which every action returns to the same state with certainty.
std::vector<bool> absorbing_states(const Environment& env);

struct TrajectoryOptions {
  std::size_t horizon_cap = 0;
  std::vector<bool> terminal;          // empty: run to the cap without flagging
  std::optional<std::uint64_t> seed;   // needed for stochastic transitions
};

// Greedy (lowest index on ties) execution of the policy from the most likely
// initial state.
Trajectory greedy_trajectory(const Environment& env, const Policy& policy,
                             const TrajectoryOptions& options);

Trajectory most_likely_trajectory(const Environment& env, const RewardTable& reward,
                                  const PlannerConfig& config,
                                  const TrajectoryOptions& options);

}  // namespace stratlink
