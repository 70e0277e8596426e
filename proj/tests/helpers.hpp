#pragma once

#include <cmath>
#include <vector>

#include "stratlink/linkscore.hpp"
#include "stratlink/rng.hpp"

namespace testing {

using namespace stratlink;

// Two states, two actions. A1 stays put, A2 moves S1 -> S2 (and stays at S2).
inline Environment toy_env() {
  return Environment::from_dense(2, 2, {1.0, 0.0},
                                 {{{1, 0}, {0, 1}}, {{0, 1}, {0, 1}}},
                                 {{"S1", "S2"}, {"A1", "A2"}});
}

// alpha: the step to S2 only pays off if A2 follows there.
inline RewardTable toy_reward_alpha() { return RewardTable(2, 2, {1.0, 0.5, 1.0, 2.5}); }
inline RewardTable toy_reward_beta() { return RewardTable(2, 2, {1.0, 1.5, 1.0, 1.5}); }

struct RandomMdp {
  Environment env;
  RewardTable reward;
};

// Random environment with up to S states and A actions. Roughly half are
// deterministic; rewards are integers-over-4 plus noise so exact ties are rare.
inline RandomMdp random_mdp(Rng& rng, std::size_t max_states, std::size_t max_actions,
                            bool deterministic) {
  const std::size_t S = 2 + rng.below(max_states - 1);
  const std::size_t A = 2 + rng.below(max_actions - 1);
  std::vector<double> sigma(S, 0.0);
  sigma[rng.below(S)] = 1.0;
  std::vector<std::vector<Outcome>> rows(S * A);
  for (auto& row : rows) {
    if (deterministic) {
      row.push_back({rng.below(S), 1.0});
      continue;
    }
    std::vector<double> w(S);
    double total = 0.0;
    for (auto& x : w) total += x = rng.uniform() < 0.5 ? 0.0 : rng.uniform();
    if (total == 0.0) {
      w[rng.below(S)] = total = 1.0;
    }
    for (std::size_t n = 0; n < S; ++n)
      if (w[n] > 0.0) row.push_back({n, w[n] / total});
  }
  std::vector<double> r(S * A);
  for (auto& x : r) x = 2.0 * rng.uniform() - 1.0;
  return {Environment(S, A, std::move(sigma), std::move(rows)), RewardTable(S, A, std::move(r))};
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing
