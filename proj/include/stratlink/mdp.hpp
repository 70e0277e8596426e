#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace stratlink {

using StateId = std::size_t;
using ActionId = std::size_t;

// Reward entries are finite doubles or exactly this value. IEEE arithmetic
// already gives -inf + finite = -inf, so no wrapper type is needed.
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline bool is_neg_inf(double v) { return v == kNegInf; }

struct Decision {
  StateId state = 0;
  ActionId action = 0;
  friend auto operator<=>(const Decision&, const Decision&) = default;
};

struct Outcome {
  StateId next = 0;
  double prob = 0.0;
};

struct Labels {
  std::vector<std::string> states;
  std::vector<std::string> actions;
};

// Malformed user input (bad shapes, unparsable text, invalid parameters).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A constraint or reward leaves some reachable state with no admissible action.
struct InfeasibleError : std::runtime_error {
  InfeasibleError(const std::string& what, StateId s)
      : std::runtime_error(what), state(s) {}
  StateId state;
};

// Data that does not support the requested estimate (e.g. zero flow).
struct DegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Environment {
 public:
  Environment() = default;

  // Sparse form: rows[s * actions + a] lists next states with their
  // probabilities. Zero-probability entries are dropped.
  Environment(std::size_t states, std::size_t actions, std::vector<double> sigma,
              std::vector<std::vector<Outcome>> rows, Labels labels = {});

  // Dense form: tau[s][a][s'].
  static Environment from_dense(std::size_t states, std::size_t actions,
                                std::vector<double> sigma,
                                const std::vector<std::vector<std::vector<double>>>& tau,
                                Labels labels = {});

  std::size_t state_count() const { return states_; }
  std::size_t action_count() const { return actions_; }
  const std::vector<double>& initial_dist() const { return sigma_; }
  const std::vector<Outcome>& outcomes(StateId s, ActionId a) const {
    return rows_[s * actions_ + a];
  }
  double transition(StateId s, ActionId a, StateId next) const;
  bool deterministic() const;
  // Single successor of a deterministic transition.
  StateId successor(StateId s, ActionId a) const;
  const Labels& labels() const { return labels_; }
  std::string state_name(StateId s) const;
  std::string action_name(ActionId a) const;

 private:
  std::size_t states_ = 0;
  std::size_t actions_ = 0;
  std::vector<double> sigma_;
  std::vector<std::vector<Outcome>> rows_;
  Labels labels_;
};

// Human-readable list of violated invariants; empty when valid.
std::vector<std::string> validate_environment(const Environment& env);

class RewardTable {
 public:
  RewardTable() = default;
  RewardTable(std::size_t states, std::size_t actions, double fill = 0.0);
  RewardTable(std::size_t states, std::size_t actions, std::vector<double> values);

  std::size_t state_count() const { return states_; }
  std::size_t action_count() const { return actions_; }
  double operator()(StateId s, ActionId a) const { return values_[s * actions_ + a]; }
  void set(StateId s, ActionId a, double v);
  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const RewardTable&, const RewardTable&) = default;

 private:
  std::size_t states_ = 0;
  std::size_t actions_ = 0;
  std::vector<double> values_;
};

class Policy {
 public:
  Policy() = default;
  Policy(std::size_t states, std::size_t actions, std::vector<double> probs);

  std::size_t state_count() const { return states_; }
  std::size_t action_count() const { return actions_; }
  double operator()(StateId s, ActionId a) const { return probs_[s * actions_ + a]; }
  const double* row(StateId s) const { return probs_.data() + s * actions_; }
  const std::vector<double>& probs() const { return probs_; }
  // Most likely action, lowest index on ties.
  ActionId greedy(StateId s) const;

  static Policy deterministic(std::size_t states, std::size_t actions,
                              const std::vector<ActionId>& choice);

  friend bool operator==(const Policy&, const Policy&) = default;

 private:
  std::size_t states_ = 0;
  std::size_t actions_ = 0;
  std::vector<double> probs_;
};

std::vector<std::string> validate_policy(const Policy& policy, const Environment& env);

struct Trajectory {
  std::vector<Decision> decisions;
  bool truncated = false;  // horizon cap hit before a terminal state
  std::size_t horizon() const { return decisions.size(); }
};

enum class PlannerMode { soft, hard, stationary };

const char* to_string(PlannerMode m);
PlannerMode planner_mode_from_string(const std::string& s);

struct PlannerConfig {
  double gamma = 0.99;
  double beta = 100.0;
  int iterations = 250;
  PlannerMode mode = PlannerMode::soft;

  // gamma may equal 1; every planner runs a finite number of backups.
  void validate() const;
};

Trajectory rollout(const Environment& env, const Policy& policy, std::size_t horizon,
                   std::uint64_t seed);

double expected_return(const Environment& env, const Policy& policy,
                       const RewardTable& reward, double gamma, std::size_t horizon);

// Same, starting from an arbitrary state distribution.
double expected_return_from(const Environment& env, const Policy& policy,
                            const RewardTable& reward, double gamma,
                            std::size_t horizon, std::vector<double> start);

}  // namespace stratlink
