// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "helpers.hpp"
#include "oracle.hpp"
#include "stratlink/gridworld.hpp"
#include "stratlink/irl.hpp"
#include "stratlink/recommend.hpp"
#include "stratlink/traffic.hpp"

using namespace stratlink;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned g_threads = 1;
std::uint64_t g_seed = 1;

// ---- GridWorld helpers ------------------------------------------------------

struct Marked {
  GridWorld world;
  LinkScoreMatrix m;
  std::vector<std::vector<std::size_t>> keys;  // decisions leading to each key, by pickup order
  std::vector<std::size_t> doors;              // decision taken on each door cell, same order
};

// Key decisions: the run of steps that ends with picking the key up, starting
// after the previous pickup or the last door crossing, whichever is later.
Marked mark(const std::string& layout) {
  Marked out{load_gridworld(layout), {}, {}, {}};
  const auto& g = out.world;
  out.m = explanation_matrix(g.env, g.reward, {0.99, 100.0, 250, PlannerMode::soft},
                             {g.classes, g.trajectory_options(), g_threads});
  const auto& d = out.m.trajectory().decisions;
  long boundary = -1;
  std::vector<std::pair<char, std::size_t>> door_at;
  for (std::size_t t = 0; t < d.size(); ++t) {
    const char tile = g.tile(g.cell_of(d[t].state));
    if (tile >= 'A' && tile <= 'E') {
      door_at.push_back({tile, t});
      boundary = static_cast<long>(t);
    }
    const StateId next = g.env.successor(d[t].state, d[t].action);
    if (g.flags_of(next) != g.flags_of(d[t].state)) {
      std::vector<std::size_t> run;
      for (long u = boundary + 1; u <= static_cast<long>(t); ++u) run.push_back(static_cast<std::size_t>(u));
      out.keys.push_back(run);
      boundary = static_cast<long>(t);
    }
  }
  for (std::size_t k = 0; k < out.keys.size(); ++k) {
    const auto& t = out.keys[k].back();
    const unsigned gained = g.flags_of(g.env.successor(d[t].state, d[t].action)) & ~g.flags_of(d[t].state);
    char door = '?';
    for (std::size_t b = 0; b < g.keys.size(); ++b)
      if (gained >> b & 1u) door = static_cast<char>(g.keys[b] - 'a' + 'A');
    for (const auto& [tile, at] : door_at)
      if (tile == door) out.doors.push_back(at);
  }
  return out;
}

// Score between two decisions regardless of which comes first in time.
double pair_score(const LinkScoreMatrix& m, std::size_t a, std::size_t b) {
  return a <= b ? m.at(a, b) : m.at(b, a);
}

// ---- criteria ---------------------------------------------------------------

Verdict toy() {
  const LinkQuery q{{0, 1}, ConstraintSet({{1, 1}}, 2)};
  const PlannerConfig cfg{1.0, 100.0, 2, PlannerMode::stationary};
  const double a = link_score(testing::toy_env(), testing::toy_reward_alpha(), cfg, q);
  const double b = link_score(testing::toy_env(), testing::toy_reward_beta(), cfg, q);
  return {std::abs(a - 1.0) <= 1e-3 && std::abs(b) <= 1e-3, fmt("r_alpha %.6f, r_beta %.6f", a, b)};
}

Verdict simple_maze() {
  const auto m = mark(STRATLINK_DATA_DIR "/simple.txt");
  if (m.keys.size() != 1 || m.doors.size() != 1) return {false, "could not locate the key and door"};
  const std::size_t D = m.doors[0];
  std::set<std::size_t> marked(m.keys[0].begin(), m.keys[0].end());
  marked.insert(D);
  double kd = 1.0, other = 0.0;
  for (std::size_t k : m.keys[0]) kd = std::min(kd, pair_score(m.m, k, D));
  for (std::size_t t = 0; t < m.m.size(); ++t)
    for (std::size_t u = t + 1; u < m.m.size(); ++u)
      if (!marked.count(t) && !marked.count(u)) other = std::max(other, std::abs(m.m.at(t, u)));
  return {kd > 0.9 && other < 0.05,
          fmt("T=%zu, %zu key decisions, min K->D %.4f, max |other| %.4f", m.m.size(), m.keys[0].size(), kd, other)};
}

Verdict two_keys() {
  const auto ind = mark(STRATLINK_DATA_DIR "/independent_keys.txt");
  const auto cor = mark(STRATLINK_DATA_DIR "/correlated_keys.txt");
  if (ind.keys.size() != 2 || ind.doors.size() != 2 || cor.keys.size() != 2)
    return {false, "could not locate keys and doors"};
  double cross = 0.0;
  for (std::size_t a : ind.keys[0])
    for (std::size_t b : ind.keys[1]) cross = std::max(cross, pair_score(ind.m, a, b));
  for (std::size_t a : ind.keys[0]) cross = std::max(cross, pair_score(ind.m, a, ind.doors[1]));
  for (std::size_t b : ind.keys[1]) cross = std::max(cross, pair_score(ind.m, b, ind.doors[0]));
  double linked = 1.0;
  for (std::size_t a : cor.keys[0])
    for (std::size_t b : cor.keys[1]) linked = std::min(linked, pair_score(cor.m, a, b));
  return {cross < 0.05 && linked > 0.9, fmt("independent max cross %.4f, correlated min K1-K2 %.4f", cross, linked)};
}

Verdict grouping() {
  ShortcutsSpec spec;
  spec.nodes = 5;
  spec.preps = 4;
  spec.cost = 0.1;
  spec.prep_nodes = {1, 1, 1, 1};
  spec.shortcuts = {{2, 5, {3}}, {1, 3, {4}}, {3, 5, {1, 2}}};
  const auto env = build_shortcuts(spec);
  const auto cfg = shortcuts_planner_config(spec);
  const auto recs = compute_recommendations(env, cfg);
  const auto g = strategy_aware_groups(env, cfg, recs, 0.1);
  std::string shown;
  for (const auto& grp : g.groups) {
    shown += "{";
    for (std::size_t i = 0; i < grp.size(); ++i) shown += (i ? "," : "") + std::to_string(grp[i]);
    shown += "}";
  }
  const std::vector<std::vector<int>> want = {{1, 2}, {4}};
  return {g.groups == want, "groups " + shown};
}

Verdict recommendation_safety() {
  Rng seeds(2024);
  std::vector<ShortcutsSpec> specs;
  for (int i = 0; i < 100; ++i) specs.push_back(generate_shortcuts_spec(10, 5, 5, 0.1, seeds.next()));
  const auto report = recommendation_report(specs, {0.0, 0, g_threads});
  int unsafe = 0, pc_unsafe = 0, mismatch = 0;
  for (const auto& e : report.environments) {
    bool bad = false, pc_bad = false;
    for (const auto& [k, s] : e.methods.at(GroupingMethod::strategy_aware).by_k) bad |= s.worst < e.baseline - 1e-9;
    for (const auto& [k, s] : e.methods.at(GroupingMethod::pick_and_choose).by_k) pc_bad |= s.worst < e.baseline - 1e-9;
    unsafe += bad;
    pc_unsafe += pc_bad;
    const int K = static_cast<int>(e.recommendations.preps.size());
    const double full = e.methods.at(GroupingMethod::pick_and_choose).by_k.at(K).average;
    for (auto m : kGroupingMethods)
      if (std::abs(e.methods.at(m).by_k.at(K).average - full) > 1e-9) ++mismatch;
  }
  double curve_min = 1e300;
  for (const auto& p : report.curves.at(GroupingMethod::strategy_aware))
    if (p.k > 0) curve_min = std::min(curve_min, p.worst - report.baseline);
  const bool a = unsafe == 0, b = pc_unsafe >= 50, c = mismatch == 0;
  return {a && b && c,
          fmt("(a) %s: strategy-aware worst < baseline on %d/100 envs (averaged worst-case curve stays %+.3f or more above baseline for k>0); "
              "(b) %s: pick-and-choose unsafe on %d/100; (c) %s: %d max-k mismatches",
              a ? "ok" : "FAIL", unsafe, curve_min, b ? "ok" : "FAIL", pc_unsafe, c ? "ok" : "FAIL", mismatch)};
}

Verdict traffic_rl() {
  ArterialSpec spec;  // J=10, f0=2, 100 points, free flow
  const auto pre = optimal_routing(spec);
  const auto post = optimal_routing(spec, 10);
  bool all_arterial = true;
  for (double a : pre.policy.stay) all_arterial &= a == 1.0;
  const auto s = junction_link_scores(pre.policy, post.policy);
  double middle = 0.0;
  for (std::size_t j = 1; j + 1 < s.size(); ++j) middle = std::max(middle, std::abs(s[j]));
  const bool ok = all_arterial && std::abs(s[0] - 1.0) <= 0.02 && std::abs(s[9] - 1.0) <= 0.02 && middle < 0.05;
  return {ok, fmt("pre all-arterial %s, J1 %.3f, J10 %.3f, max |J2..J9| %.3f", all_arterial ? "yes" : "no", s[0], s[9],
                  middle)};
}

Verdict traffic_sim() {
  ArterialSpec spec;
  spec.alpha = 0.15;
  const auto counts = simulate_drivers(spec, SimConfig{}, 1000, 5000, g_seed);
  const auto p = extract_policies(counts);
  const auto s = junction_link_scores(p.pre, p.post);
  std::size_t best = 0;
  for (std::size_t j = 1; j < 9; ++j)
    if (s[j] > s[best]) best = j;
  const bool ok = best == 8 && s[8] > 0.0 && p.post.stay[9] == 0.0;
  std::string shown;
  for (double x : s) shown += fmt(" %.2f", x);
  return {ok, fmt("largest J1-J9 score at J%zu, post J10 frequency %.3f; scores", best + 1, p.post.stay[9]) + shown};
}

Verdict irl_trend() {
  const auto g = load_gridworld(STRATLINK_DATA_DIR "/simple.txt");
  const IrlTask task{"simple", g.env, g.reward, g.classes, g.trajectory_options(), g.width * g.height, 1e-4};
  const SweepConfig cfg{default_temperatures(), 5, 1000, 10000, g_seed, g_threads};
  const auto r = irl_sweep({task}, cfg);
  const auto& lo = r.points.front();  // beta 0.2, near uniform
  const auto& mid = r.points[4];      // beta 1.0
  const auto& hi = r.points.back();   // beta 1.8, least stochastic
  const bool ok = hi.mse_mean > mid.mse_mean && lo.mse_mean < 0.01 && lo.epic_mean >= mid.epic_mean;
  std::string table;
  for (const auto& p : r.points) table += fmt(" [b=%.1f epic %.3f mse %.2e]", p.beta, p.epic_mean, p.mse_mean);
  return {ok, fmt("mse(1.8) %.2e > mse(1.0) %.2e; mse(0.2) %.2e < 0.01; epic(0.2) %.3f >= epic(1.0) %.3f;", hi.mse_mean,
                  mid.mse_mean, lo.mse_mean, lo.epic_mean, mid.epic_mean) +
              table};
}

Verdict oracle() {
  double mean_abs = 0.0;
  const double gap = testing::oracle_score_gap(200, 2024, &mean_abs);
  const double fd = testing::fd_gradient_gap();
  return {gap < 1e-6 && fd < 1e-4,
          fmt("max score gap %.2e over 200 MDPs (mean |score| %.3f), max relative gradient gap %.2e", gap, mean_abs, fd)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> only;
  app.add_option("--only", only, "criterion ids to run")->delimiter(',');
  app.add_option("--threads", g_threads)->check(CLI::PositiveNumber);
  app.add_option("--seed", g_seed, "seed for the simulation and the IRL sweep");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "toy example link scores", 1, toy},
      {2, "simple maze explanation matrix", 60, simple_maze},
      {3, "two-keys layouts", 120, two_keys},
      {4, "strategy-aware grouping", 10, grouping},
      {5, "recommendation safety", 1800, recommendation_safety},
      {6, "traffic optimal routing", 300, traffic_rl},
      {7, "simulated drivers", 600, traffic_sim},
      {8, "IRL temperature trend", 3600, irl_trend},
      {9, "oracle equivalence", 300, oracle},
  };
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = v.pass && in_time;
    failed += !pass;
    std::printf("%s %d %s (%.1fs of %.0fs): %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, c.budget_s,
                v.detail.c_str(), in_time ? "" : " [over time budget]");
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
