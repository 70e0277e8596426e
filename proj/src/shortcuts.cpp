#include "stratlink/shortcuts.hpp"

#include <algorithm>
#include <string>

#include "stratlink/rng.hpp"

namespace stratlink {

void ShortcutsSpec::validate() const {
  if (nodes < 2) throw InputError("need at least two nodes");
  if (preps < 1 || preps > 16) throw InputError("prep count must be in [1,16]");
  if (!(cost > 0.0 && cost < 0.5)) throw InputError("prep cost must lie in (0, 1/2)");
  if (static_cast<int>(prep_nodes.size()) != preps) throw InputError("one node per prep required");
  for (int n : prep_nodes)
    if (n != 1) throw InputError("preparation actions must sit at node 1");
  for (const auto& sc : shortcuts) {
    if (!(1 <= sc.from && sc.from < sc.to && sc.to <= nodes))
      throw InputError("shortcut endpoints must satisfy 1 <= from < to <= N");
    if (sc.required.empty()) throw InputError("shortcut needs at least one prep");
    if (!std::is_sorted(sc.required.begin(), sc.required.end()) ||
        std::adjacent_find(sc.required.begin(), sc.required.end()) != sc.required.end())
      throw InputError("shortcut prep list must be sorted and distinct");
    if (sc.required.front() < 1 || sc.required.back() > preps)
      throw InputError("shortcut prep id out of range");
  }
}

namespace {

bool jump_valid(const Shortcut& sc, int node, unsigned flags) {
  if (node != sc.from) return false;
  return std::all_of(sc.required.begin(), sc.required.end(),
                     [&](int j) { return flags >> (j - 1) & 1u; });
}

}  // namespace

double shortcuts_reward(const ShortcutsSpec& spec, int node, unsigned flags, ActionId action) {
  const int N = spec.nodes, I = spec.shortcut_count();
  if (action == 0) return node + 1 == N ? -1.0 + N : -1.0;
  if (action <= static_cast<ActionId>(I)) {
    const auto& sc = spec.shortcuts[action - 1];
    if (!jump_valid(sc, node, flags)) return -1.0;
    const double r = -(sc.to - sc.from) + static_cast<double>(sc.required.size()) * 2.0 * spec.cost;
    return sc.to == N ? r + N : r;
  }
  const int j = static_cast<int>(action) - I;
  return node == spec.prep_nodes.at(j - 1) ? -spec.cost : -1.0;
}

Shortcuts build_shortcuts(const ShortcutsSpec& spec) {
  spec.validate();
  Shortcuts out;
  out.spec = spec;
  const int N = spec.nodes, I = spec.shortcut_count(), J = spec.preps;
  const std::size_t F = out.flag_count(), S = static_cast<std::size_t>(N) * F;
  const std::size_t A = 1 + static_cast<std::size_t>(I + J);
  std::vector<std::vector<Outcome>> rows(S * A);
  std::vector<double> reward(S * A);
  std::vector<std::size_t> observable(S);
  out.terminal.assign(S, false);
  Labels labels;
  labels.actions.push_back("move");
  for (int i = 1; i <= I; ++i) labels.actions.push_back("jump" + std::to_string(i));
  for (int j = 1; j <= J; ++j) labels.actions.push_back("prep" + std::to_string(j));

  for (int n = 1; n <= N; ++n) {
    for (unsigned f = 0; f < F; ++f) {
      const StateId s = out.state(n, f);
      observable[s] = static_cast<std::size_t>(n - 1);
      std::string name = "n" + std::to_string(n) + "|";
      for (int j = 0; j < J; ++j) name += (f >> j & 1u) ? '1' : '0';
      labels.states.push_back(std::move(name));
      out.terminal[s] = n == N;
      for (ActionId a = 0; a < A; ++a) {
        StateId next = s;
        double r = 0.0;  // node N is absorbing with zero reward
        if (n != N) {
          r = shortcuts_reward(spec, n, f, a);
          if (a == 0) {
            next = out.state(n + 1, f);
          } else if (a <= static_cast<ActionId>(I)) {
            const auto& sc = spec.shortcuts[a - 1];
            if (jump_valid(sc, n, f)) next = out.state(sc.to, f);
          } else {
            const int j = static_cast<int>(a) - I;
            if (n == spec.prep_nodes[j - 1]) next = out.state(n, f | 1u << (j - 1));
          }
        }
        rows[s * A + a].push_back({next, 1.0});
        reward[s * A + a] = r;
      }
    }
  }
  std::vector<double> sigma(S, 0.0);
  sigma[out.initial_state()] = 1.0;
  out.env = Environment(S, A, std::move(sigma), std::move(rows), std::move(labels));
  out.reward = RewardTable(S, A, std::move(reward));
  out.classes = DecisionClasses(std::move(observable));
  return out;
}

ShortcutsSpec generate_shortcuts_spec(int N, int I, int J, double C, std::uint64_t seed) {
  if (N < 2 || I < 1 || J < 1 || !(C > 0.0 && C < 0.5))
    throw InputError("generator needs N >= 2, I >= 1, J >= 1 and 0 < C < 1/2");
  Rng rng(seed);
  ShortcutsSpec spec;
  spec.nodes = N;
  spec.preps = J;
  spec.cost = C;
  for (int i = 0; i < I; ++i) {
    const int n1 = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(N)));
    int n2 = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(N - 1)));
    if (n2 >= n1) ++n2;  // uniform over {1..N} minus {n1}
    Shortcut sc{std::min(n1, n2), std::max(n1, n2), {}};
    const int count = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(J)));
    std::vector<int> pool;
    for (int j = 1; j <= J; ++j) pool.push_back(j);
    for (int k = 0; k < count; ++k) {
      const auto pick = rng.below(pool.size());
      sc.required.push_back(pool[pick]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    std::sort(sc.required.begin(), sc.required.end());
    spec.shortcuts.push_back(std::move(sc));
  }
  spec.prep_nodes.assign(static_cast<std::size_t>(J), 1);
  return spec;
}

Shortcuts generate_shortcuts(int N, int I, int J, double C, std::uint64_t seed) {
  return build_shortcuts(generate_shortcuts_spec(N, I, J, C, seed));
}

}  // namespace stratlink
