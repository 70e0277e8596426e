#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stratlink/planners.hpp"

namespace stratlink {

struct LinkQuery {
  Decision setup;
  ConstraintSet payoff;
};

// pi(a|s) - pi^C(a|s) with both policies from the same planner config.
double link_score(const Environment& env, const RewardTable& reward,
                  const PlannerConfig& config, const LinkQuery& query);

// Forbid every action of `states` for which in_region(action) holds.
ConstraintSet region_constraint(const std::vector<StateId>& states,
                                const std::function<bool(ActionId)>& in_region,
                                std::size_t action_count);

// Quantized continuous actions: action k takes value values[k]; forbid those
// inside the interval. Defaults describe (lo, hi].
struct ActionInterval {
  double lo = 0.0;
  double hi = 1.0;
  bool lo_open = true;
  bool hi_open = false;
  bool contains(double x) const;
};

ConstraintSet region_constraint(const std::vector<StateId>& states,
                                const std::vector<double>& values,
                                const ActionInterval& interval);

// Upper-triangular T x T scores along a trajectory; (t, u) with t <= u holds
// the score of set-up decision t for pay-off decision u.
class LinkScoreMatrix {
 public:
  LinkScoreMatrix() = default;
  explicit LinkScoreMatrix(Trajectory trajectory);

  std::size_t size() const { return trajectory_.decisions.size(); }
  const Trajectory& trajectory() const { return trajectory_; }
  double at(std::size_t t, std::size_t u) const;
  void set(std::size_t t, std::size_t u, double v);
  // Defined entries in row-major order of the upper triangle.
  const std::vector<double>& values() const { return values_; }

  // One "x y score" line per defined cell: x = pay-off index (column), y = set-up index (row).
  std::string to_text() const;

 private:
  std::size_t index(std::size_t t, std::size_t u) const;
  Trajectory trajectory_;
  std::vector<double> values_;
};

struct ExplanationOptions {
  DecisionClasses classes;     // identity unless the environment has hidden flags
  TrajectoryOptions trajectory;
  unsigned threads = 1;
};

// Most likely trajectory, then one constrained plan per distinct
// pay-off decision class, shared across the column.
LinkScoreMatrix explanation_matrix(const Environment& env, const RewardTable& reward,
                                   const PlannerConfig& config,
                                   const ExplanationOptions& options);

// Scores for fixed decisions along `trajectory` (used to compare rewards on
// the same cells).
LinkScoreMatrix score_trajectory(const Environment& env, const RewardTable& reward,
                                 const PlannerConfig& config, const Trajectory& trajectory,
                                 const DecisionClasses& classes, unsigned threads = 1);

// Run fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace stratlink
