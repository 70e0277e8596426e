#include "stratlink/linkscore.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "stratlink/format.hpp"

namespace stratlink {

double link_score(const Environment& env, const RewardTable& reward,
                  const PlannerConfig& config, const LinkQuery& query) {
  const auto& [s, a] = query.setup;
  if (s >= env.state_count() || a >= env.action_count())
    throw InputError("set-up decision outside the environment");
  const Policy base = plan(env, reward, config);
  const Policy constrained = plan_constrained(env, reward, config, query.payoff);
  return base(s, a) - constrained(s, a);
}

ConstraintSet region_constraint(const std::vector<StateId>& states,
                                const std::function<bool(ActionId)>& in_region,
                                std::size_t action_count) {
  std::vector<Decision> forbidden;
  for (StateId s : states)
    for (ActionId a = 0; a < action_count; ++a)
      if (in_region(a)) forbidden.push_back({s, a});
  return ConstraintSet(std::move(forbidden), action_count);
}

bool ActionInterval::contains(double x) const {
  const bool above = lo_open ? x > lo : x >= lo;
  const bool below = hi_open ? x < hi : x <= hi;
  return above && below;
}

ConstraintSet region_constraint(const std::vector<StateId>& states,
                                const std::vector<double>& values,
                                const ActionInterval& interval) {
  return region_constraint(
      states, [&](ActionId a) { return interval.contains(values.at(a)); }, values.size());
}

LinkScoreMatrix::LinkScoreMatrix(Trajectory trajectory)
    : trajectory_(std::move(trajectory)),
      values_(size() * (size() + 1) / 2, 0.0) {}

std::size_t LinkScoreMatrix::index(std::size_t t, std::size_t u) const {
  if (t > u || u >= size()) throw std::out_of_range("link score cell undefined");
  // rows t of lengths T, T-1, ...
  return t * size() - t * (t - 1) / 2 + (u - t);
}

double LinkScoreMatrix::at(std::size_t t, std::size_t u) const { return values_[index(t, u)]; }

void LinkScoreMatrix::set(std::size_t t, std::size_t u, double v) { values_[index(t, u)] = v; }

std::string LinkScoreMatrix::to_text() const {
  std::string out;
  for (std::size_t t = 0; t < size(); ++t)
    for (std::size_t u = t; u < size(); ++u)
      out += std::to_string(u) + ' ' + std::to_string(t) + ' ' + format_double(at(t, u)) + '\n';
  return out;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

LinkScoreMatrix score_trajectory(const Environment& env, const RewardTable& reward,
                                 const PlannerConfig& config, const Trajectory& trajectory,
                                 const DecisionClasses& classes, unsigned threads) {
  const Policy base = plan(env, reward, config);
  const std::size_t T = trajectory.decisions.size();

  // Distinct pay-off constraints; repeated decisions and class-mates share one plan.
  std::map<ConstraintSet, std::size_t> slot;
  std::vector<ConstraintSet> unique;
  std::vector<std::size_t> column_slot(T);
  for (std::size_t u = 0; u < T; ++u) {
    auto c = class_constraint(classes, trajectory.decisions[u], env.action_count());
    auto [it, inserted] = slot.try_emplace(std::move(c), unique.size());
    if (inserted) unique.push_back(it->first);
    column_slot[u] = it->second;
  }
  std::vector<Policy> constrained(unique.size());
  parallel_for(unique.size(), threads, [&](std::size_t i) {
    constrained[i] = plan_constrained(env, reward, config, unique[i]);
  });

  LinkScoreMatrix m(trajectory);
  for (std::size_t u = 0; u < T; ++u) {
    const Policy& pc = constrained[column_slot[u]];
    for (std::size_t t = 0; t <= u; ++t) {
      const auto& [s, a] = trajectory.decisions[t];
      m.set(t, u, base(s, a) - pc(s, a));
    }
  }
  return m;
}

LinkScoreMatrix explanation_matrix(const Environment& env, const RewardTable& reward,
                                   const PlannerConfig& config,
                                   const ExplanationOptions& options) {
  const Policy base = plan(env, reward, config);
  const Trajectory traj = greedy_trajectory(env, base, options.trajectory);
  return score_trajectory(env, reward, config, traj, options.classes, options.threads);
}

}  // namespace stratlink
