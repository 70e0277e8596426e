#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stratlink/shortcuts.hpp"

namespace stratlink {

// Undiscounted, beta 100, 2(N+J) soft iterations.
PlannerConfig shortcuts_planner_config(const ShortcutsSpec& spec);
// Halfway between 0 and 1/J.
double default_threshold(const ShortcutsSpec& spec);

struct RecommendationSet {
  std::vector<int> preps;           // prep ids, ascending
  std::vector<Decision> decisions;  // (initial state, prep action), same order
  std::vector<double> probability;  // chance the prep has been taken by the horizon
};

// Preps whose flag ends up set with probability > 0.5 when the planner runs
// from node 1 with no flags.
RecommendationSet compute_recommendations(const Shortcuts& env, const PlannerConfig& config);

enum class GroupingMethod { pick_and_choose, all_or_nothing, strategy_aware };
inline constexpr std::array<GroupingMethod, 3> kGroupingMethods = {
    GroupingMethod::pick_and_choose, GroupingMethod::all_or_nothing, GroupingMethod::strategy_aware};
const char* to_string(GroupingMethod m);

struct Grouping {
  GroupingMethod method = GroupingMethod::pick_and_choose;
  double threshold = 0.0;
  std::vector<std::vector<int>> seed_groups;  // one per recommendation, may overlap
  std::vector<std::vector<int>> groups;       // disjoint, used for adoption
  std::vector<std::vector<double>> scores;    // [i][j]: prep i set-up, prep j pay-off
};

// Connected components of overlapping groups, each sorted, ordered by smallest member.
std::vector<std::vector<int>> merge_groups(const std::vector<std::vector<int>>& groups);

Grouping pick_and_choose(const RecommendationSet& recs);
Grouping all_or_nothing(const RecommendationSet& recs);
Grouping strategy_aware_groups(const Shortcuts& env, const PlannerConfig& config,
                               const RecommendationSet& recs, double threshold);

// The agent takes the adopted preps first, then plans with every prep forbidden
// and follows the plan greedily. Returns the undiscounted return.
double evaluate_adoption(const Shortcuts& env, const PlannerConfig& config,
                         const std::vector<int>& adopted);

// Undiscounted return of the unconstrained planner, followed greedily.
double optimal_performance(const Shortcuts& env, const PlannerConfig& config);

struct AdoptionOutcome {
  std::vector<int> adopted;
  int k = 0;
  double performance = 0.0;
};

// Every union of whole groups, smallest bitmask first.
std::vector<AdoptionOutcome> enumerate_adoptions(const Shortcuts& env, const PlannerConfig& config,
                                                 const Grouping& grouping);

struct KStats {
  double average = 0.0;
  double worst = 0.0;
};

struct MethodResult {
  Grouping grouping;
  std::vector<AdoptionOutcome> outcomes;
  std::map<int, KStats> by_k;
};

struct EnvironmentReport {
  ShortcutsSpec spec;
  RecommendationSet recommendations;
  double baseline = 0.0;
  double optimal = 0.0;
  std::map<GroupingMethod, MethodResult> methods;
};

struct CurvePoint {
  int k = 0;
  double average = 0.0;  // mean over environments of the per-k average
  double worst = 0.0;    // mean over environments of the per-k minimum
  int environments = 0;  // environments where k is reachable
};

struct RecommendationReport {
  std::vector<EnvironmentReport> environments;
  std::map<GroupingMethod, std::vector<CurvePoint>> curves;
  // All-or-nothing with the unreachable intermediate k counted at baseline.
  std::vector<CurvePoint> all_or_nothing_filled;
  double baseline = 0.0;  // mean over environments
};

struct ReportConfig {
  double threshold = 0.0;  // 0 selects default_threshold per environment
  int iterations = 0;      // 0 selects 2(N+J)
  unsigned threads = 1;
};

RecommendationReport recommendation_report(const std::vector<ShortcutsSpec>& specs,
                                           const ReportConfig& config = {});

}  // namespace stratlink
