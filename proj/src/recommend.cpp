#include "stratlink/recommend.hpp"

#include <algorithm>
#include <numeric>

#include "stratlink/linkscore.hpp"

namespace stratlink {

PlannerConfig shortcuts_planner_config(const ShortcutsSpec& spec) {
  return {1.0, 100.0, 2 * (spec.nodes + spec.preps), PlannerMode::soft};
}

double default_threshold(const ShortcutsSpec& spec) { return 0.5 / double(spec.preps); }

const char* to_string(GroupingMethod m) {
  switch (m) {
    case GroupingMethod::pick_and_choose: return "pick_and_choose";
    case GroupingMethod::all_or_nothing: return "all_or_nothing";
    case GroupingMethod::strategy_aware: return "strategy_aware";
  }
  return "?";
}

RecommendationSet compute_recommendations(const Shortcuts& env, const PlannerConfig& config) {
  const Policy policy = plan(env.env, env.reward, config);
  const std::size_t S = env.env.state_count(), A = env.env.action_count();
  std::vector<double> d(S, 0.0), next(S);
  d[env.initial_state()] = 1.0;
  for (std::size_t t = 0; t < env.horizon_cap(); ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (StateId s = 0; s < S; ++s) {
      if (d[s] == 0.0) continue;
      for (ActionId a = 0; a < A; ++a) {
        const double w = d[s] * policy(s, a);
        if (w > 0.0) next[env.env.successor(s, a)] += w;
      }
    }
    std::swap(d, next);
  }
  RecommendationSet recs;
  for (int j = 1; j <= env.spec.preps; ++j) {
    double p = 0.0;
    for (StateId s = 0; s < S; ++s)
      if (env.flags_of(s) >> (j - 1) & 1u) p += d[s];
    if (p > 0.5) {
      recs.preps.push_back(j);
      recs.decisions.push_back({env.initial_state(), env.prep(j)});
      recs.probability.push_back(p);
    }
  }
  return recs;
}

std::vector<std::vector<int>> merge_groups(const std::vector<std::vector<int>>& groups) {
  std::vector<std::vector<int>> out;
  for (const auto& g : groups) {
    std::vector<int> merged(g.begin(), g.end());
    std::vector<std::vector<int>> keep;
    for (auto& o : out) {
      const bool overlap = std::any_of(o.begin(), o.end(), [&](int x) {
        return std::find(merged.begin(), merged.end(), x) != merged.end();
      });
      if (overlap) merged.insert(merged.end(), o.begin(), o.end());
      else keep.push_back(std::move(o));
    }
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    if (!merged.empty()) keep.push_back(std::move(merged));
    out = std::move(keep);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Grouping pick_and_choose(const RecommendationSet& recs) {
  Grouping g;
  g.method = GroupingMethod::pick_and_choose;
  for (int p : recs.preps) g.seed_groups.push_back({p});
  g.groups = g.seed_groups;
  return g;
}

Grouping all_or_nothing(const RecommendationSet& recs) {
  Grouping g;
  g.method = GroupingMethod::all_or_nothing;
  for (std::size_t i = 0; i < recs.preps.size(); ++i) g.seed_groups.push_back(recs.preps);
  if (!recs.preps.empty()) g.groups.push_back(recs.preps);
  return g;
}

Grouping strategy_aware_groups(const Shortcuts& env, const PlannerConfig& config,
                               const RecommendationSet& recs, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InputError("threshold must lie in (0,1)");
  Grouping g;
  g.method = GroupingMethod::strategy_aware;
  g.threshold = threshold;
  const std::size_t R = recs.preps.size();
  g.scores.assign(R, std::vector<double>(R, 0.0));
  const Policy base = plan(env.env, env.reward, config);
  // One constrained plan per pay-off prep, shared by every set-up.
  for (std::size_t j = 0; j < R; ++j) {
    const auto payoff = class_constraint(env.classes, recs.decisions[j], env.env.action_count());
    const Policy constrained = plan_constrained(env.env, env.reward, config, payoff);
    for (std::size_t i = 0; i < R; ++i) {
      const Decision d = recs.decisions[i];
      g.scores[i][j] = base(d.state, d.action) - constrained(d.state, d.action);
    }
  }
  for (std::size_t i = 0; i < R; ++i) {
    std::vector<int> group{recs.preps[i]};
    for (std::size_t j = 0; j < R; ++j)
      if (j != i && g.scores[i][j] > threshold) group.push_back(recs.preps[j]);
    std::sort(group.begin(), group.end());
    g.seed_groups.push_back(std::move(group));
  }
  g.groups = merge_groups(g.seed_groups);
  return g;
}

namespace {

double greedy_return(const Shortcuts& env, const Policy& policy, StateId s, double start) {
  double total = start;
  for (std::size_t t = 0; t < env.horizon_cap() && !env.terminal[s]; ++t) {
    const ActionId a = policy.greedy(s);
    total += env.reward(s, a);
    s = env.env.successor(s, a);
  }
  return total;
}

}  // namespace

double evaluate_adoption(const Shortcuts& env, const PlannerConfig& config,
                         const std::vector<int>& adopted) {
  unsigned flags = 0;
  double paid = 0.0;
  for (int j : adopted) {
    if (j < 1 || j > env.spec.preps) throw InputError("adopted prep id out of range");
    if (flags >> (j - 1) & 1u) throw InputError("prep adopted twice");
    flags |= 1u << (j - 1);
    paid += env.reward(env.state(1, flags & ~(1u << (j - 1))), env.prep(j));
  }
  std::vector<Decision> forbidden;
  for (StateId s = 0; s < env.env.state_count(); ++s)
    for (int j = 1; j <= env.spec.preps; ++j) forbidden.push_back({s, env.prep(j)});
  const ConstraintSet no_preps(std::move(forbidden), env.env.action_count());
  const Policy policy = plan_constrained(env.env, env.reward, config, no_preps);
  return greedy_return(env, policy, env.state(1, flags), paid);
}

double optimal_performance(const Shortcuts& env, const PlannerConfig& config) {
  return greedy_return(env, plan(env.env, env.reward, config), env.initial_state(), 0.0);
}

namespace {

using AdoptionCache = std::map<std::vector<int>, double>;

std::vector<AdoptionOutcome> enumerate_cached(const Shortcuts& env, const PlannerConfig& config,
                                              const Grouping& grouping, AdoptionCache& cache) {
  const std::size_t G = grouping.groups.size();
  if (G > 20) throw InputError("too many groups to enumerate");
  std::vector<AdoptionOutcome> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << G); ++mask) {
    AdoptionOutcome o;
    for (std::size_t g = 0; g < G; ++g)
      if (mask >> g & 1u)
        o.adopted.insert(o.adopted.end(), grouping.groups[g].begin(), grouping.groups[g].end());
    std::sort(o.adopted.begin(), o.adopted.end());
    o.k = static_cast<int>(o.adopted.size());
    auto it = cache.find(o.adopted);
    if (it == cache.end()) it = cache.emplace(o.adopted, evaluate_adoption(env, config, o.adopted)).first;
    o.performance = it->second;
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace

std::vector<AdoptionOutcome> enumerate_adoptions(const Shortcuts& env, const PlannerConfig& config,
                                                 const Grouping& grouping) {
  AdoptionCache cache;
  return enumerate_cached(env, config, grouping, cache);
}

namespace {

std::map<int, KStats> bucket(const std::vector<AdoptionOutcome>& outcomes) {
  std::map<int, std::vector<double>> by;
  for (const auto& o : outcomes) by[o.k].push_back(o.performance);
  std::map<int, KStats> out;
  for (const auto& [k, v] : by)
    out[k] = {std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()),
              *std::min_element(v.begin(), v.end())};
  return out;
}

std::vector<CurvePoint> average_curves(const std::vector<const std::map<int, KStats>*>& per_env) {
  std::map<int, CurvePoint> acc;
  for (const auto* m : per_env)
    for (const auto& [k, s] : *m) {
      auto& p = acc[k];
      p.k = k;
      p.average += s.average;
      p.worst += s.worst;
      p.environments++;
    }
  std::vector<CurvePoint> out;
  for (auto& [k, p] : acc) {
    p.average /= p.environments;
    p.worst /= p.environments;
    out.push_back(p);
  }
  return out;
}

EnvironmentReport report_one(const ShortcutsSpec& spec, const ReportConfig& config) {
  const Shortcuts env = build_shortcuts(spec);
  PlannerConfig planner = shortcuts_planner_config(spec);
  if (config.iterations > 0) planner.iterations = config.iterations;
  const double threshold = config.threshold > 0.0 ? config.threshold : default_threshold(spec);
  EnvironmentReport r;
  r.spec = spec;
  r.recommendations = compute_recommendations(env, planner);
  r.baseline = evaluate_adoption(env, planner, {});
  r.optimal = optimal_performance(env, planner);
  const Grouping groupings[] = {pick_and_choose(r.recommendations), all_or_nothing(r.recommendations),
                                strategy_aware_groups(env, planner, r.recommendations, threshold)};
  // Adoption value depends only on the adopted set; share it across methods.
  AdoptionCache cache;
  for (const auto& g : groupings) {
    MethodResult m;
    m.grouping = g;
    m.outcomes = enumerate_cached(env, planner, g, cache);
    m.by_k = bucket(m.outcomes);
    r.methods[g.method] = std::move(m);
  }
  return r;
}

}  // namespace

RecommendationReport recommendation_report(const std::vector<ShortcutsSpec>& specs,
                                           const ReportConfig& config) {
  if (specs.empty()) throw InputError("no environments to report on");
  RecommendationReport report;
  report.environments.resize(specs.size());
  parallel_for(specs.size(), config.threads,
               [&](std::size_t i) { report.environments[i] = report_one(specs[i], config); });

  std::vector<std::map<int, KStats>> filled;
  for (const auto& e : report.environments) {
    report.baseline += e.baseline;
    auto f = e.methods.at(GroupingMethod::all_or_nothing).by_k;
    const int kmax = static_cast<int>(e.recommendations.preps.size());
    for (int k = 1; k < kmax; ++k) f.emplace(k, KStats{e.baseline, e.baseline});
    filled.push_back(std::move(f));
  }
  report.baseline /= double(specs.size());
  for (auto m : kGroupingMethods) {
    std::vector<const std::map<int, KStats>*> per_env;
    for (const auto& e : report.environments) per_env.push_back(&e.methods.at(m).by_k);
    report.curves[m] = average_curves(per_env);
  }
  std::vector<const std::map<int, KStats>*> per_env;
  for (const auto& f : filled) per_env.push_back(&f);
  report.all_or_nothing_filled = average_curves(per_env);
  return report;
}

}  // namespace stratlink
