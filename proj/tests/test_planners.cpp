#include <cmath>
#include <functional>

#include "doctest.h"
#include "helpers.hpp"
#include "stratlink/gridworld.hpp"

using namespace stratlink;
using testing::toy_env;

namespace {

const PlannerConfig kToySoft{1.0, 100.0, 2, PlannerMode::soft};
const PlannerConfig kToyHard{1.0, 100.0, 2, PlannerMode::hard};
const PlannerConfig kToyStationary{1.0, 100.0, 2, PlannerMode::stationary};

// Best undiscounted-or-discounted return over all action sequences of length
// h from s (deterministic dynamics only).
double best_sequence(const Environment& env, const RewardTable& r, double gamma, StateId s, int h) {
  if (h == 0) return 0.0;
  double best = kNegInf;
  for (ActionId a = 0; a < env.action_count(); ++a)
    best = std::max(best, r(s, a) + gamma * best_sequence(env, r, gamma, env.successor(s, a), h - 1));
  return best;
}

}  // namespace

TEST_CASE("soft planner prefers A2 at S1 under the linked reward") {
  const auto pi = soft_value_iteration(toy_env(), testing::toy_reward_alpha(), kToySoft);
  CHECK(pi(0, 1) > 0.999);
}

TEST_CASE("one-step softmax on a single state") {
  const Environment env(1, 2, {1.0}, {{{0, 1.0}}, {{0, 1.0}}});
  const auto pi = soft_value_iteration(env, RewardTable(1, 2, {1.0, 0.0}), {1e-6, 1.0, 1, PlannerMode::soft});
  CHECK(pi(0, 0) == doctest::Approx(std::exp(1.0) / (1.0 + std::exp(1.0))).epsilon(1e-6));
  CHECK(pi(0, 1) == doctest::Approx(1.0 / (1.0 + std::exp(1.0))).epsilon(1e-6));
}

TEST_CASE("equal rewards give a uniform policy") {
  // three-state ring: action 0 advances, 1 goes back, 2 stays
  std::vector<std::vector<Outcome>> rows;
  for (StateId s = 0; s < 3; ++s) {
    rows.push_back({{(s + 1) % 3, 1.0}});
    rows.push_back({{(s + 2) % 3, 1.0}});
    rows.push_back({{s, 1.0}});
  }
  const Environment env(3, 3, {1.0, 0.0, 0.0}, rows);
  const auto pi = soft_value_iteration(env, RewardTable(3, 3, -1.0), {0.9, 5.0, 40, PlannerMode::soft});
  for (StateId s = 0; s < 3; ++s)
    for (ActionId a = 0; a < 3; ++a) CHECK(pi(s, a) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("hard planner reproduces the toy optimal policies") {
  for (const auto& r : {testing::toy_reward_alpha(), testing::toy_reward_beta()}) {
    const auto pi = hard_value_iteration(toy_env(), r, kToyHard);
    CHECK(pi(0, 1) == 1.0);
    CHECK(pi(1, 1) == 1.0);
  }
}

TEST_CASE("hard planner breaks ties towards action 0") {
  const Environment env(1, 3, {1.0}, {{{0, 1.0}}, {{0, 1.0}}, {{0, 1.0}}});
  const auto pi = hard_value_iteration(env, RewardTable(1, 3, {0.0, 1.0, 1.0}), {0.9, 1.0, 3, PlannerMode::hard});
  CHECK(pi(0, 1) == 1.0);
  const auto flat = hard_value_iteration(env, RewardTable(1, 3, 2.0), {0.9, 1.0, 3, PlannerMode::hard});
  CHECK(flat(0, 0) == 1.0);
}

TEST_CASE("constraints mask exactly the forbidden entries") {
  const ConstraintSet c({{1, 1}}, 2);
  const auto r = apply_constraint(testing::toy_reward_alpha(), c);
  CHECK(is_neg_inf(r(1, 1)));
  CHECK(r(0, 0) == 1.0);
  CHECK(r(0, 1) == 0.5);
  CHECK(r(1, 0) == 1.0);
  CHECK(apply_constraint(testing::toy_reward_alpha(), ConstraintSet{}) == testing::toy_reward_alpha());
}

TEST_CASE("constraint sets reject forbidding a whole state") {
  CHECK_THROWS_AS(ConstraintSet({{0, 0}, {0, 1}}, 2), InfeasibleError);
  const ConstraintSet c({{1, 0}, {0, 1}, {1, 0}}, 2);
  CHECK(c.forbidden().size() == 2);
  CHECK(c.contains({0, 1}));
  CHECK_FALSE(c.contains({0, 0}));
}

TEST_CASE("blocking A2 at S2 removes the incentive to move under the linked reward") {
  const ConstraintSet c({{1, 1}}, 2);
  CHECK(plan_constrained(toy_env(), testing::toy_reward_alpha(), kToySoft, c)(0, 1) < 0.001);
}

TEST_CASE("blocking A2 at S2 leaves A2 at S1 optimal under the unlinked reward") {
  // The time-indexed soft planner sees a two-step tie here (1.5 + 1 vs 1 + 1.5)
  // so the stationary Boltzmann planner is the one that matches the strategy view.
  const ConstraintSet c({{1, 1}}, 2);
  CHECK(plan_constrained(toy_env(), testing::toy_reward_beta(), kToyStationary, c)(0, 1) > 0.999);
  CHECK(plan_constrained(toy_env(), testing::toy_reward_alpha(), kToyStationary, c)(0, 1) < 0.001);
}

TEST_CASE("a constraint on an unreachable state leaves reachable rows unchanged") {
  // state 2 can never be entered
  const Environment env(3, 2, {1.0, 0.0, 0.0},
                        {{{0, 1.0}}, {{1, 1.0}}, {{1, 1.0}}, {{0, 1.0}}, {{0, 1.0}}, {{2, 1.0}}});
  const RewardTable r(3, 2, {0.0, 1.0, 0.5, -0.2, 3.0, 0.0});
  const PlannerConfig cfg{0.9, 3.0, 20, PlannerMode::soft};
  const auto reach = reachable_states(env);
  CHECK_FALSE(reach[2]);
  const auto base = plan(env, r, cfg);
  const auto con = plan_constrained(env, r, cfg, ConstraintSet({{2, 0}}, 2));
  for (StateId s = 0; s < 3; ++s) {
    if (!reach[s]) continue;
    for (ActionId a = 0; a < 2; ++a) CHECK(base(s, a) == con(s, a));
  }
}

TEST_CASE("empty constraint reproduces the unconstrained plan bit for bit") {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const auto m = testing::random_mdp(rng, 5, 3, i % 2 == 1);
    const PlannerConfig cfg{0.95, 10.0, 8, PlannerMode::soft};
    CHECK(plan(m.env, m.reward, cfg) == plan_constrained(m.env, m.reward, cfg, ConstraintSet{}));
  }
}

TEST_CASE("soft policies are distributions with exact zeros at forbidden entries") {
  Rng rng(17);
  for (int i = 0; i < 50; ++i) {
    const auto m = testing::random_mdp(rng, 5, 3, i % 2 == 0);
    const StateId s = rng.below(m.env.state_count());
    const ActionId a = rng.below(m.env.action_count());
    const ConstraintSet c({{s, a}}, m.env.action_count());
    const auto pi = plan_constrained(m.env, m.reward, {0.9, 50.0, 10, PlannerMode::soft}, c);
    CHECK(validate_policy(pi, m.env).empty());
    CHECK(pi(s, a) == 0.0);
  }
}

TEST_CASE("infeasible reward tables name the first stuck state") {
  // every action at state 0 leads into the dead state 1, so state 0 is stuck first
  const Environment env(2, 2, {1.0, 0.0}, {{{1, 1.0}}, {{1, 1.0}}, {{1, 1.0}}, {{1, 1.0}}});
  const RewardTable r(2, 2, {0.0, 0.0, kNegInf, kNegInf});
  try {
    soft_value_iteration(env, r, {0.9, 1.0, 3, PlannerMode::soft});
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(e.state == 0);
  }
  CHECK_THROWS_AS(hard_value_iteration(env, r, {0.9, 1.0, 3, PlannerMode::hard}), InfeasibleError);
}

TEST_CASE("soft argmax approaches the brute-force optimum as beta grows") {
  Rng rng(23);
  const int H = 4;
  int disagreements[3] = {0, 0, 0};
  const double betas[3] = {1.0, 10.0, 100.0};
  for (int i = 0; i < 100; ++i) {
    const auto m = testing::random_mdp(rng, 5, 3, true);
    for (int b = 0; b < 3; ++b) {
      const auto pi = soft_value_iteration(m.env, m.reward, {1.0, betas[b], H, PlannerMode::soft});
      for (StateId s = 0; s < m.env.state_count(); ++s) {
        std::vector<double> q;
        for (ActionId a = 0; a < m.env.action_count(); ++a)
          q.push_back(m.reward(s, a) + best_sequence(m.env, m.reward, 1.0, m.env.successor(s, a), H - 1));
        const auto best = static_cast<ActionId>(std::max_element(q.begin(), q.end()) - q.begin());
        double gap = 1e9;
        for (ActionId a = 0; a < q.size(); ++a)
          if (a != best) gap = std::min(gap, q[best] - q[a]);
        if (gap < 0.1) continue;  // entropy terms are at most H log(A) / beta
        if (pi.greedy(s) != best) ++disagreements[b];
      }
    }
  }
  CHECK(disagreements[1] <= disagreements[0]);
  CHECK(disagreements[2] <= disagreements[1]);
  CHECK(disagreements[2] == 0);
}

TEST_CASE("stationary enumeration on the toy") {
  const auto a = stationary_enumeration(toy_env(), testing::toy_reward_alpha(), kToyStationary);
  CHECK(a(0, 1) > 0.999);
  CHECK(a(1, 1) > 0.999);
}

TEST_CASE("most likely trajectories") {
  const auto traj = most_likely_trajectory(toy_env(), testing::toy_reward_alpha(), kToySoft, {2, {}, {}});
  REQUIRE(traj.horizon() == 2);
  CHECK(traj.decisions[0] == Decision{0, 1});
  CHECK(traj.decisions[1] == Decision{1, 1});
  CHECK_FALSE(traj.truncated);

  const auto g = parse_gridworld("S.T\n");
  const auto corridor = most_likely_trajectory(g.env, g.reward, {0.99, 100.0, 50, PlannerMode::soft},
                                               g.trajectory_options());
  REQUIRE(corridor.horizon() == 2);
  for (const auto& d : corridor.decisions) CHECK(d.action == GridWorld::right);
  CHECK_FALSE(corridor.truncated);
}

TEST_CASE("trajectory truncation is flagged") {
  const auto g = parse_gridworld("S..T\n");
  auto opts = g.trajectory_options();
  opts.horizon_cap = 2;
  const auto t = most_likely_trajectory(g.env, g.reward, {0.99, 100.0, 50, PlannerMode::soft}, opts);
  CHECK(t.horizon() == 2);
  CHECK(t.truncated);
}

TEST_CASE("absorbing and reachable states") {
  const auto abs = absorbing_states(toy_env());
  CHECK_FALSE(abs[0]);
  CHECK(abs[1]);
  auto r = testing::toy_reward_alpha();
  r.set(0, 1, kNegInf);
  CHECK_FALSE(reachable_states(toy_env(), &r)[1]);
  CHECK(reachable_states(toy_env())[1]);
}
