#include <algorithm>

#include "doctest.h"
#include "stratlink/recommend.hpp"

using namespace stratlink;

namespace {

// Five nodes, four preps: prep4 opens 1->3, preps 1+2 open 3->5, prep3 opens 2->5.
ShortcutsSpec linked_pair_spec() {
  ShortcutsSpec spec;
  spec.nodes = 5;
  spec.preps = 4;
  spec.cost = 0.1;
  spec.prep_nodes = {1, 1, 1, 1};
  spec.shortcuts = {{2, 5, {3}}, {1, 3, {4}}, {3, 5, {1, 2}}};
  return spec;
}

using Groups = std::vector<std::vector<int>>;

}  // namespace

TEST_CASE("recommendations and grouping on the linked-pair environment") {
  const auto env = build_shortcuts(linked_pair_spec());
  const auto cfg = shortcuts_planner_config(env.spec);
  const auto recs = compute_recommendations(env, cfg);
  CHECK(recs.preps == std::vector<int>{1, 2, 4});
  for (double p : recs.probability) CHECK(p > 0.99);

  const auto sa = strategy_aware_groups(env, cfg, recs, 0.1);
  CHECK(sa.groups == Groups{{1, 2}, {4}});
  CHECK(sa.seed_groups == Groups{{1, 2}, {1, 2}, {4}});
  CHECK(sa.scores[0][1] > 0.3);
  CHECK(sa.scores[1][0] > 0.3);
  CHECK(sa.scores[0][2] < 0.1);
  CHECK(sa.scores[2][0] < 0.1);

  CHECK(pick_and_choose(recs).groups == Groups{{1}, {2}, {4}});
  CHECK(all_or_nothing(recs).groups == Groups{{1, 2, 4}});
  CHECK(strategy_aware_groups(env, cfg, recs, 0.999).groups == Groups{{1}, {2}, {4}});
}

TEST_CASE("adoption model on the linked-pair environment") {
  const auto env = build_shortcuts(linked_pair_spec());
  const auto cfg = shortcuts_planner_config(env.spec);
  const double baseline = evaluate_adoption(env, cfg, {});
  CHECK(baseline == doctest::Approx(1.0));
  // prep1 without its partner only costs C
  CHECK(evaluate_adoption(env, cfg, {1}) == doctest::Approx(baseline - 0.1));
  CHECK(evaluate_adoption(env, cfg, {1, 2, 4}) == doctest::Approx(optimal_performance(env, cfg)));
  CHECK(optimal_performance(env, cfg) == doctest::Approx(1.3));
}

TEST_CASE("no shortcuts means no recommendations") {
  ShortcutsSpec spec;
  spec.nodes = 4;
  spec.preps = 2;
  spec.cost = 0.1;
  spec.prep_nodes = {1, 1};
  const auto env = build_shortcuts(spec);
  CHECK(compute_recommendations(env, shortcuts_planner_config(spec)).preps.empty());
}

TEST_CASE("merging overlapping groups") {
  CHECK(merge_groups({{3, 1}, {4}, {1, 5}, {4, 6}, {2}}) == Groups{{1, 3, 5}, {2}, {4, 6}});
  CHECK(merge_groups({}).empty());
}

TEST_CASE("default threshold sits halfway to 1/J") {
  ShortcutsSpec spec;
  spec.preps = 5;
  CHECK(default_threshold(spec) == doctest::Approx(0.1));
}

TEST_CASE("adoption enumeration uses whole groups only") {
  const auto env = build_shortcuts(linked_pair_spec());
  const auto cfg = shortcuts_planner_config(env.spec);
  const auto recs = compute_recommendations(env, cfg);
  const auto sa = strategy_aware_groups(env, cfg, recs, 0.1);
  const auto outcomes = enumerate_adoptions(env, cfg, sa);
  REQUIRE(outcomes.size() == 4);
  CHECK(outcomes[0].adopted.empty());
  CHECK(outcomes[1].adopted == std::vector<int>{1, 2});
  CHECK(outcomes[2].adopted == std::vector<int>{4});
  CHECK(outcomes[3].k == 3);
  for (const auto& o : outcomes) CHECK(o.performance >= outcomes[0].performance);
}

TEST_CASE("report invariants over seeded environments") {
  std::vector<ShortcutsSpec> specs;
  for (std::uint64_t seed = 0; seed < 12; ++seed) specs.push_back(generate_shortcuts_spec(10, 5, 5, 0.1, seed));
  const auto report = recommendation_report(specs, {0.0, 0, 2});
  REQUIRE(report.environments.size() == specs.size());
  for (const auto& e : report.environments) {
    const int K = static_cast<int>(e.recommendations.preps.size());
    for (const auto& [method, r] : e.methods) {
      CHECK(r.by_k.at(0).average == doctest::Approx(e.baseline));
      CHECK(r.by_k.at(K).average == doctest::Approx(e.methods.at(GroupingMethod::pick_and_choose).by_k.at(K).average));
      for (std::size_t i = 0; i < r.grouping.seed_groups.size(); ++i) {
        const auto& g = r.grouping.seed_groups[i];
        CHECK(std::find(g.begin(), g.end(), e.recommendations.preps[i]) != g.end());
      }
      // every adopted set is a union of whole groups
      for (const auto& o : r.outcomes)
        for (const auto& g : r.grouping.groups) {
          const auto in = std::count_if(g.begin(), g.end(), [&](int p) {
            return std::find(o.adopted.begin(), o.adopted.end(), p) != o.adopted.end();
          });
          CHECK((in == 0 || in == static_cast<long>(g.size())));
        }
    }
    const auto& aon = e.methods.at(GroupingMethod::all_or_nothing).by_k;
    CHECK(aon.size() == (K == 0 ? 1u : 2u));
  }
  // the filled variant covers every k exactly where pick-and-choose does
  const auto& pc = report.curves.at(GroupingMethod::pick_and_choose);
  REQUIRE(pc.size() == report.all_or_nothing_filled.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    CHECK(pc[i].k == report.all_or_nothing_filled[i].k);
    CHECK(pc[i].environments == report.all_or_nothing_filled[i].environments);
  }
  CHECK(report.curves.at(GroupingMethod::strategy_aware).front().average == doctest::Approx(report.baseline));
}
