#include "stratlink/planners.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "stratlink/rng.hpp"

namespace stratlink {

ConstraintSet::ConstraintSet(std::vector<Decision> forbidden, std::size_t action_count)
    : forbidden_(std::move(forbidden)) {
  std::sort(forbidden_.begin(), forbidden_.end());
  forbidden_.erase(std::unique(forbidden_.begin(), forbidden_.end()), forbidden_.end());
  std::size_t run = 0;
  for (std::size_t i = 0; i < forbidden_.size(); ++i) {
    if (forbidden_[i].action >= action_count) throw InputError("constraint action out of range");
    run = (i > 0 && forbidden_[i - 1].state == forbidden_[i].state) ? run + 1 : 1;
    if (run >= action_count)
      throw InfeasibleError("constraint forbids every action at state " +
                                std::to_string(forbidden_[i].state),
                            forbidden_[i].state);
  }
}

bool ConstraintSet::contains(Decision d) const {
  return std::binary_search(forbidden_.begin(), forbidden_.end(), d);
}

DecisionClasses::DecisionClasses(std::vector<std::size_t> observable)
    : observable_(std::move(observable)) {
  std::size_t n = 0;
  for (auto o : observable_) n = std::max(n, o + 1);
  groups_.resize(n);
  for (StateId s = 0; s < observable_.size(); ++s) groups_[observable_[s]].push_back(s);
}

DecisionClass DecisionClasses::of(Decision d) const {
  DecisionClass c{observable(d.state), d.action, {}};
  if (identity()) {
    c.members.push_back(d);
  } else {
    for (StateId s : groups_.at(c.observable)) c.members.push_back({s, d.action});
  }
  return c;
}

ConstraintSet class_constraint(const DecisionClasses& classes, Decision d,
                               std::size_t action_count) {
  return ConstraintSet(classes.of(d).members, action_count);
}

RewardTable apply_constraint(const RewardTable& reward, const ConstraintSet& constraint) {
  RewardTable out = reward;
  for (const auto& d : constraint.forbidden()) {
    if (d.state >= reward.state_count() || d.action >= reward.action_count())
      throw InputError("constraint refers to a decision outside the reward table");
    out.set(d.state, d.action, kNegInf);
  }
  return out;
}

namespace {

void check_shapes(const Environment& env, const RewardTable& reward) {
  if (reward.state_count() != env.state_count() || reward.action_count() != env.action_count())
    throw InputError("reward table does not match environment");
}

// Q = r + gamma * E[V(s')], with -inf propagating.
void backup(const Environment& env, const RewardTable& reward, double gamma,
            const std::vector<double>& V, std::vector<double>& Q) {
  const std::size_t S = env.state_count(), A = env.action_count();
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      double q = reward(s, a);
      if (!is_neg_inf(q)) {
        double ev = 0.0;
        for (const auto& o : env.outcomes(s, a)) {
          if (is_neg_inf(V[o.next])) {
            ev = kNegInf;
            break;
          }
          ev += o.prob * V[o.next];
        }
        q = is_neg_inf(ev) ? kNegInf : q + gamma * ev;
      }
      Q[s * A + a] = q;
    }
  }
}

double row_max(const double* q, std::size_t A) {
  double m = kNegInf;
  for (std::size_t a = 0; a < A; ++a) m = std::max(m, q[a]);
  return m;
}

double soft_value(const double* q, std::size_t A, double beta) {
  const double m = row_max(q, A);
  if (is_neg_inf(m)) return kNegInf;
  double sum = 0.0;
  for (std::size_t a = 0; a < A; ++a)
    if (!is_neg_inf(q[a])) sum += std::exp(beta * (q[a] - m));
  return m + std::log(sum) / beta;
}

// Reachability through actions with finite Q; any such state with no finite
// action makes the plan infeasible.
void check_feasible(const Environment& env, const std::vector<double>& Q) {
  const std::size_t S = env.state_count(), A = env.action_count();
  std::vector<bool> seen(S, false);
  std::deque<StateId> queue;
  for (StateId s = 0; s < S; ++s)
    if (env.initial_dist()[s] > 0.0) {
      seen[s] = true;
      queue.push_back(s);
    }
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    bool any = false;
    for (std::size_t a = 0; a < A; ++a) {
      if (is_neg_inf(Q[s * A + a])) continue;
      any = true;
      for (const auto& o : env.outcomes(s, a))
        if (!seen[o.next]) {
          seen[o.next] = true;
          queue.push_back(o.next);
        }
    }
    if (!any)
      throw InfeasibleError("no admissible action at reachable state " + env.state_name(s), s);
  }
}

// Absorbing states whose admissible actions all pay the same reward: the
// actions are indistinguishable, so they carry no choice (and no entropy).
std::vector<bool> inert_states(const Environment& env, const RewardTable& reward) {
  const auto absorbing = absorbing_states(env);
  std::vector<bool> out(env.state_count(), false);
  for (StateId s = 0; s < env.state_count(); ++s) {
    if (!absorbing[s]) continue;
    double first = kNegInf;
    bool same = true;
    for (ActionId a = 0; a < env.action_count(); ++a) {
      const double r = reward(s, a);
      if (is_neg_inf(r)) continue;
      if (is_neg_inf(first)) first = r;
      else if (r != first) same = false;
    }
    out[s] = same;
  }
  return out;
}

std::vector<double> run_backups(const Environment& env, const RewardTable& reward,
                                const PlannerConfig& config, bool soft) {
  const std::size_t S = env.state_count(), A = env.action_count();
  std::vector<double> V(S, 0.0), Q(S * A, 0.0);
  const auto inert = inert_states(env, reward);
  for (int it = 0; it < config.iterations; ++it) {
    backup(env, reward, config.gamma, V, Q);
    for (std::size_t s = 0; s < S; ++s)
      V[s] = soft && !inert[s] ? soft_value(&Q[s * A], A, config.beta) : row_max(&Q[s * A], A);
  }
  return Q;
}

}  // namespace

Policy soft_value_iteration(const Environment& env, const RewardTable& reward,
                            const PlannerConfig& config) {
  config.validate();
  check_shapes(env, reward);
  const std::size_t S = env.state_count(), A = env.action_count();
  const auto Q = run_backups(env, reward, config, true);
  check_feasible(env, Q);
  std::vector<double> probs(S * A, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    const double* q = &Q[s * A];
    double* p = &probs[s * A];
    const double m = row_max(q, A);
    if (is_neg_inf(m)) {  // unreachable dead end
      std::fill(p, p + A, 1.0 / static_cast<double>(A));
      continue;
    }
    double sum = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      p[a] = is_neg_inf(q[a]) ? 0.0 : std::exp(config.beta * (q[a] - m));
      sum += p[a];
    }
    for (std::size_t a = 0; a < A; ++a) p[a] /= sum;
  }
  return Policy(S, A, std::move(probs));
}

Policy hard_value_iteration(const Environment& env, const RewardTable& reward,
                            const PlannerConfig& config) {
  config.validate();
  check_shapes(env, reward);
  const std::size_t S = env.state_count(), A = env.action_count();
  const auto Q = run_backups(env, reward, config, false);
  check_feasible(env, Q);
  std::vector<ActionId> choice(S, 0);
  for (std::size_t s = 0; s < S; ++s) {
    const double* q = &Q[s * A];
    for (std::size_t a = 1; a < A; ++a)
      if (q[a] > q[choice[s]]) choice[s] = a;
  }
  return Policy::deterministic(S, A, choice);
}

Policy stationary_enumeration(const Environment& env, const RewardTable& reward,
                              const PlannerConfig& config) {
  config.validate();
  check_shapes(env, reward);
  const std::size_t S = env.state_count(), A = env.action_count();
  const auto reach = reachable_states(env, &reward);

  std::vector<std::vector<ActionId>> allowed(S);
  double combos = 1.0;
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a)
      if (!is_neg_inf(reward(s, a))) allowed[s].push_back(a);
    if (allowed[s].empty() && reach[s])
      throw InfeasibleError("no admissible action at reachable state " + env.state_name(s), s);
    combos *= static_cast<double>(std::max<std::size_t>(allowed[s].size(), 1));
  }
  if (combos > double(1 << 22)) throw InputError("too many stationary policies to enumerate");

  std::vector<std::size_t> digit(S, 0);
  std::vector<std::vector<std::size_t>> choices;
  std::vector<double> returns;
  std::vector<double> probs(S * A);
  const auto horizon = static_cast<std::size_t>(config.iterations);
  for (;;) {
    std::fill(probs.begin(), probs.end(), 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      if (allowed[s].empty()) {
        std::fill(&probs[s * A], &probs[s * A] + A, 1.0 / static_cast<double>(A));
      } else {
        probs[s * A + allowed[s][digit[s]]] = 1.0;
      }
    }
    returns.push_back(expected_return(env, Policy(S, A, probs), reward, config.gamma, horizon));
    choices.push_back(digit);
    std::size_t s = 0;
    while (s < S && (allowed[s].empty() || ++digit[s] == allowed[s].size())) {
      digit[s] = 0;
      ++s;
    }
    if (s == S) break;
  }

  const double best = *std::max_element(returns.begin(), returns.end());
  std::vector<double> marg(S * A, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < returns.size(); ++k) {
    const double w = std::exp(config.beta * (returns[k] - best));
    total += w;
    for (std::size_t s = 0; s < S; ++s)
      if (!allowed[s].empty()) marg[s * A + allowed[s][choices[k][s]]] += w;
  }
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a)
      marg[s * A + a] = allowed[s].empty() ? 1.0 / static_cast<double>(A) : marg[s * A + a] / total;
  }
  return Policy(S, A, std::move(marg));
}

Policy plan(const Environment& env, const RewardTable& reward, const PlannerConfig& config) {
  switch (config.mode) {
    case PlannerMode::soft: return soft_value_iteration(env, reward, config);
    case PlannerMode::hard: return hard_value_iteration(env, reward, config);
    case PlannerMode::stationary: return stationary_enumeration(env, reward, config);
  }
  throw InputError("unknown planner mode");
}

Policy plan_constrained(const Environment& env, const RewardTable& reward,
                        const PlannerConfig& config, const ConstraintSet& constraint) {
  if (constraint.empty()) return plan(env, reward, config);
  return plan(env, apply_constraint(reward, constraint), config);
}

std::vector<bool> reachable_states(const Environment& env, const RewardTable* reward) {
  const std::size_t S = env.state_count(), A = env.action_count();
  std::vector<bool> seen(S, false);
  std::deque<StateId> queue;
  for (StateId s = 0; s < S; ++s)
    if (env.initial_dist()[s] > 0.0) {
      seen[s] = true;
      queue.push_back(s);
    }
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    for (std::size_t a = 0; a < A; ++a) {
      if (reward && is_neg_inf((*reward)(s, a))) continue;
      for (const auto& o : env.outcomes(s, a))
        if (!seen[o.next]) {
          seen[o.next] = true;
          queue.push_back(o.next);
        }
    }
  }
  return seen;
}

std::vector<bool> absorbing_states(const Environment& env) {
  std::vector<bool> out(env.state_count(), true);
  for (StateId s = 0; s < env.state_count(); ++s)
    for (ActionId a = 0; a < env.action_count() && out[s]; ++a) {
      const auto& row = env.outcomes(s, a);
      out[s] = row.size() == 1 && row.front().next == s;
    }
  return out;
}

Trajectory greedy_trajectory(const Environment& env, const Policy& policy,
                             const TrajectoryOptions& options) {
  if (options.horizon_cap == 0) throw InputError("horizon cap must be positive");
  if (!env.deterministic() && !options.seed)
    throw InputError("stochastic transitions need a seed for next-state sampling");
  std::optional<Rng> rng;
  if (options.seed) rng.emplace(*options.seed);

  const auto& sigma = env.initial_dist();
  StateId s = static_cast<StateId>(std::max_element(sigma.begin(), sigma.end()) - sigma.begin());
  const bool has_terminal = !options.terminal.empty();
  Trajectory traj;
  while (traj.decisions.size() < options.horizon_cap) {
    if (has_terminal && options.terminal[s]) return traj;
    const ActionId a = policy.greedy(s);
    traj.decisions.push_back({s, a});
    const auto& row = env.outcomes(s, a);
    if (row.size() == 1) {
      s = row.front().next;
    } else {
      std::vector<double> w;
      for (const auto& o : row) w.push_back(o.prob);
      s = row[rng->categorical(w.data(), w.size())].next;
    }
  }
  traj.truncated = has_terminal && !options.terminal[s];
  return traj;
}

Trajectory most_likely_trajectory(const Environment& env, const RewardTable& reward,
                                  const PlannerConfig& config,
                                  const TrajectoryOptions& options) {
  return greedy_trajectory(env, plan(env, reward, config), options);
}

}  // namespace stratlink
