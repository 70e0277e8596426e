#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stratlink/linkscore.hpp"

namespace stratlink {

struct DemoSet {
  std::vector<Trajectory> trajectories;
  std::size_t horizon = 0;
  double beta = 0.0;   // planner that produced the demos
  double gamma = 0.0;
};

// `count` independent rollouts of the planned policy, each `horizon` steps.
DemoSet sample_demonstrations(const Environment& env, const RewardTable& reward,
                              const PlannerConfig& config, std::size_t count, std::size_t horizon,
                              std::uint64_t seed);

struct IrlConfig {
  int iterations = 10000;
  double learning_rate = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double beta = 1.0;  // inverse temperature of the inner soft planner

  void validate() const;
};

// Per-(state, action) visitation counts of the demos, averaged per trajectory.
std::vector<double> demo_visitation(const Environment& env, const DemoSet& demos);

// Expected visitation over demos.horizon steps under the time-indexed soft
// policy for `reward`, started from the demos' empirical first states.
std::vector<double> expected_visitation(const Environment& env, const RewardTable& reward,
                                        const DemoSet& demos, double beta);

// Demo visitation minus expected visitation. For deterministic dynamics this is
// the gradient of demo_log_likelihood divided by beta.
std::vector<double> maxent_gradient(const Environment& env, const RewardTable& reward,
                                    const DemoSet& demos, double beta);

// Mean over demos of sum_t log pi_t(a_t | s_t).
double demo_log_likelihood(const Environment& env, const RewardTable& reward,
                           const DemoSet& demos, double beta);

// Adam ascent from the zero reward. `curve`, if given, receives the log
// likelihood every iterations/100 steps (and at the end).
RewardTable maxent_irl(const Environment& env, const DemoSet& demos, const IrlConfig& config,
                       std::vector<double>* curve = nullptr);

struct EpicConfig {
  double gamma = 0.99;  // canonicalisation discount; states and actions weighted uniformly
};

// Rewards over (s, a, s'), index (s * A + a) * S + s'.
struct TransitionReward {
  std::size_t states = 0;
  std::size_t actions = 0;
  std::vector<double> values;

  static TransitionReward lift(const RewardTable& r);
  double operator()(StateId s, ActionId a, StateId next) const {
    return values[(s * actions + a) * states + next];
  }
};

// Pearson distance sqrt((1 - rho) / 2) between canonicalised rewards; nullopt
// when either canonical reward is constant.
std::optional<double> epic_distance(const TransitionReward& r1, const TransitionReward& r2,
                                    const EpicConfig& config = {});
std::optional<double> epic_distance(const RewardTable& r1, const RewardTable& r2,
                                    const Environment& env, const EpicConfig& config = {});

double inferred_score_error(const std::vector<double>& truth, const std::vector<double>& inferred);
double inferred_score_error(const LinkScoreMatrix& truth, const LinkScoreMatrix& inferred);

// One environment of a temperature sweep.
struct IrlTask {
  std::string name;
  Environment env;
  RewardTable reward;
  DecisionClasses classes;
  TrajectoryOptions trajectory;
  std::size_t horizon = 0;  // demo length, also the planner's iteration count
  double learning_rate = 1e-4;
};

struct IrlRun {
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> epic;
  double score_mse = 0.0;
  std::vector<double> curve;  // demo log likelihood during training
};

// Demos at inverse temperature beta, MaxEnt IRL, then EPIC distance and the
// MSE of link scores along the true most likely trajectory.
IrlRun run_irl(const IrlTask& task, double beta, std::size_t demos, int iterations,
               std::uint64_t seed);

struct SweepPoint {
  double beta = 0.0;
  double epic_mean = 0.0, epic_std = 0.0;
  double mse_mean = 0.0, mse_std = 0.0;
  int epic_undefined = 0;  // runs with a constant canonical reward
};

struct SweepConfig {
  std::vector<double> betas;
  std::size_t seeds = 5;
  std::size_t demos = 1000;
  int iterations = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  // runs[b][k][t]: beta index, seed index, task index.
  std::vector<std::vector<std::vector<IrlRun>>> runs;
};

// Per seed the metrics are averaged over tasks; bands are the population
// standard deviation across seeds.
SweepResult irl_sweep(const std::vector<IrlTask>& tasks, const SweepConfig& config);

std::vector<double> default_temperatures();  // 0.2, 0.4, ..., 1.8

}  // namespace stratlink
