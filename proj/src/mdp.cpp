#include "stratlink/mdp.hpp"

#include <algorithm>
#include <cmath>

#include "stratlink/rng.hpp"

namespace stratlink {

namespace {
constexpr double kTol = 1e-9;
}

Environment::Environment(std::size_t states, std::size_t actions, std::vector<double> sigma,
                         std::vector<std::vector<Outcome>> rows, Labels labels)
    : states_(states),
      actions_(actions),
      sigma_(std::move(sigma)),
      rows_(std::move(rows)),
      labels_(std::move(labels)) {
  if (states_ == 0 || actions_ == 0) throw InputError("environment needs states and actions");
  if (sigma_.size() != states_) throw InputError("initial distribution has wrong length");
  if (rows_.size() != states_ * actions_) throw InputError("transition table has wrong shape");
  for (auto& row : rows_) {
    std::erase_if(row, [](const Outcome& o) { return o.prob == 0.0; });
    for (const auto& o : row)
      if (o.next >= states_) throw InputError("transition to unknown state");
  }
  if (!labels_.states.empty() && labels_.states.size() != states_)
    throw InputError("state label count mismatch");
  if (!labels_.actions.empty() && labels_.actions.size() != actions_)
    throw InputError("action label count mismatch");
}

Environment Environment::from_dense(std::size_t states, std::size_t actions,
                                    std::vector<double> sigma,
                                    const std::vector<std::vector<std::vector<double>>>& tau,
                                    Labels labels) {
  if (tau.size() != states) throw InputError("transition table has wrong shape");
  std::vector<std::vector<Outcome>> rows(states * actions);
  for (std::size_t s = 0; s < states; ++s) {
    if (tau[s].size() != actions) throw InputError("transition table has wrong shape");
    for (std::size_t a = 0; a < actions; ++a) {
      if (tau[s][a].size() != states) throw InputError("transition row has wrong length");
      for (std::size_t n = 0; n < states; ++n)
        if (tau[s][a][n] != 0.0) rows[s * actions + a].push_back({n, tau[s][a][n]});
    }
  }
  return Environment(states, actions, std::move(sigma), std::move(rows), std::move(labels));
}

double Environment::transition(StateId s, ActionId a, StateId next) const {
  double p = 0.0;
  for (const auto& o : outcomes(s, a))
    if (o.next == next) p += o.prob;
  return p;
}

bool Environment::deterministic() const {
  return std::all_of(rows_.begin(), rows_.end(),
                     [](const auto& row) { return row.size() == 1; });
}

StateId Environment::successor(StateId s, ActionId a) const {
  const auto& row = outcomes(s, a);
  if (row.size() != 1) throw InputError("successor() on a stochastic transition");
  return row.front().next;
}

std::string Environment::state_name(StateId s) const {
  return labels_.states.empty() ? "s" + std::to_string(s) : labels_.states[s];
}

std::string Environment::action_name(ActionId a) const {
  return labels_.actions.empty() ? "a" + std::to_string(a) : labels_.actions[a];
}

std::vector<std::string> validate_environment(const Environment& env) {
  std::vector<std::string> report;
  double total = 0.0;
  for (std::size_t s = 0; s < env.state_count(); ++s) {
    const double p = env.initial_dist()[s];
    if (!(p >= 0.0 && p <= 1.0))
      report.push_back("sigma[" + std::to_string(s) + "] outside [0,1]");
    total += p;
  }
  if (std::abs(total - 1.0) > kTol)
    report.push_back("sigma sums to " + std::to_string(total));
  for (std::size_t s = 0; s < env.state_count(); ++s) {
    for (std::size_t a = 0; a < env.action_count(); ++a) {
      double row = 0.0;
      bool bad_entry = false;
      for (const auto& o : env.outcomes(s, a)) {
        if (!(o.prob >= 0.0 && o.prob <= 1.0)) bad_entry = true;
        row += o.prob;
      }
      const std::string where = "tau[" + std::to_string(s) + "][" + std::to_string(a) + "]";
      if (bad_entry) report.push_back(where + " has an entry outside [0,1]");
      if (std::abs(row - 1.0) > kTol)
        report.push_back(where + " sums to " + std::to_string(row));
    }
  }
  return report;
}

RewardTable::RewardTable(std::size_t states, std::size_t actions, double fill)
    : RewardTable(states, actions, std::vector<double>(states * actions, fill)) {}

RewardTable::RewardTable(std::size_t states, std::size_t actions, std::vector<double> values)
    : states_(states), actions_(actions), values_(std::move(values)) {
  if (values_.size() != states_ * actions_) throw InputError("reward table has wrong shape");
  for (double v : values_)
    if (!std::isfinite(v) && !is_neg_inf(v))
      throw InputError("reward entries must be finite or -inf");
}

void RewardTable::set(StateId s, ActionId a, double v) {
  if (!std::isfinite(v) && !is_neg_inf(v))
    throw InputError("reward entries must be finite or -inf");
  values_.at(s * actions_ + a) = v;
}

Policy::Policy(std::size_t states, std::size_t actions, std::vector<double> probs)
    : states_(states), actions_(actions), probs_(std::move(probs)) {
  if (probs_.size() != states_ * actions_) throw InputError("policy has wrong shape");
}

ActionId Policy::greedy(StateId s) const {
  const double* p = row(s);
  ActionId best = 0;
  for (ActionId a = 1; a < actions_; ++a)
    if (p[a] > p[best]) best = a;
  return best;
}

Policy Policy::deterministic(std::size_t states, std::size_t actions,
                             const std::vector<ActionId>& choice) {
  std::vector<double> probs(states * actions, 0.0);
  for (std::size_t s = 0; s < states; ++s) probs[s * actions + choice.at(s)] = 1.0;
  return Policy(states, actions, std::move(probs));
}

std::vector<std::string> validate_policy(const Policy& policy, const Environment& env) {
  std::vector<std::string> report;
  if (policy.state_count() != env.state_count() || policy.action_count() != env.action_count()) {
    report.push_back("policy shape does not match environment");
    return report;
  }
  for (std::size_t s = 0; s < policy.state_count(); ++s) {
    double total = 0.0;
    for (std::size_t a = 0; a < policy.action_count(); ++a) {
      const double p = policy(s, a);
      if (!(p >= 0.0 && p <= 1.0))
        report.push_back("pi[" + std::to_string(s) + "] has an entry outside [0,1]");
      total += p;
    }
    if (std::abs(total - 1.0) > kTol)
      report.push_back("pi[" + std::to_string(s) + "] sums to " + std::to_string(total));
  }
  return report;
}

const char* to_string(PlannerMode m) {
  switch (m) {
    case PlannerMode::soft: return "soft";
    case PlannerMode::hard: return "hard";
    case PlannerMode::stationary: return "stationary";
  }
  return "?";
}

PlannerMode planner_mode_from_string(const std::string& s) {
  if (s == "soft") return PlannerMode::soft;
  if (s == "hard") return PlannerMode::hard;
  if (s == "stationary") return PlannerMode::stationary;
  throw InputError("unknown planner mode '" + s + "'");
}

void PlannerConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InputError("gamma must lie in (0,1]");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InputError("beta must be positive");
  if (iterations < 1) throw InputError("iterations must be at least 1");
}

Trajectory rollout(const Environment& env, const Policy& policy, std::size_t horizon,
                   std::uint64_t seed) {
  if (horizon == 0) throw InputError("rollout horizon must be positive");
  Rng rng(seed);
  Trajectory traj;
  traj.decisions.reserve(horizon);
  StateId s = rng.categorical(env.initial_dist().data(), env.state_count());
  for (std::size_t t = 0; t < horizon; ++t) {
    const ActionId a = rng.categorical(policy.row(s), env.action_count());
    traj.decisions.push_back({s, a});
    const auto& row = env.outcomes(s, a);
    if (row.size() == 1) {
      s = row.front().next;
    } else {
      std::vector<double> w(row.size());
      for (std::size_t i = 0; i < row.size(); ++i) w[i] = row[i].prob;
      s = row[rng.categorical(w.data(), w.size())].next;
    }
  }
  return traj;
}

double expected_return_from(const Environment& env, const Policy& policy,
                            const RewardTable& reward, double gamma, std::size_t horizon,
                            std::vector<double> d) {
  const std::size_t S = env.state_count(), A = env.action_count();
  double total = 0.0, discount = 1.0;
  std::vector<double> next(S);
  for (std::size_t t = 0; t < horizon; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      if (d[s] == 0.0) continue;
      for (std::size_t a = 0; a < A; ++a) {
        const double w = d[s] * policy(s, a);
        if (w == 0.0) continue;
        if (is_neg_inf(reward(s, a))) return kNegInf;
        total += discount * w * reward(s, a);
        for (const auto& o : env.outcomes(s, a)) next[o.next] += w * o.prob;
      }
    }
    d.swap(next);
    discount *= gamma;
  }
  return total;
}

double expected_return(const Environment& env, const Policy& policy,
                       const RewardTable& reward, double gamma, std::size_t horizon) {
  return expected_return_from(env, policy, reward, gamma, horizon, env.initial_dist());
}

}  // namespace stratlink
