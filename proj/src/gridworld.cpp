#include "stratlink/gridworld.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace stratlink {

namespace {

bool is_key(char c) { return c >= 'a' && c <= 'e'; }
bool is_door(char c) { return c >= 'A' && c <= 'E'; }

std::vector<std::string> split_rows(std::string_view text) {
  std::vector<std::string> rows;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    rows.push_back(std::move(line));
    pos = end + 1;
  }
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  return rows;
}

constexpr int kMove[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
const char* const kActionNames[4] = {"up", "down", "left", "right"};

}  // namespace

char GridWorld::tile(std::size_t cell) const {
  const auto [i, j] = cells[cell];
  return rows[i][j];
}

GridWorld parse_gridworld(std::string_view text) {
  GridWorld g;
  g.rows = split_rows(text);
  if (g.rows.empty()) throw LayoutError("layout is empty");
  g.height = g.rows.size();
  g.width = g.rows.front().size();
  int starts = 0, targets = 0;
  for (const auto& row : g.rows) {
    if (row.size() != g.width || row.empty()) throw LayoutError("layout is not rectangular");
    for (char c : row) {
      if (c == 'S') ++starts;
      else if (c == 'T') ++targets;
      else if (c != '#' && c != '.' && !is_key(c) && !is_door(c))
        throw LayoutError(std::string("unknown layout character '") + c + "'");
      if (is_key(c) && g.keys.find(c) == std::string::npos) g.keys.push_back(c);
    }
  }
  if (starts != 1 || targets != 1)
    throw LayoutError("layout needs exactly one 'S' and one 'T'");
  std::sort(g.keys.begin(), g.keys.end());
  for (const auto& row : g.rows)
    for (char c : row)
      if (is_door(c) && g.keys.find(static_cast<char>(c - 'A' + 'a')) == std::string::npos)
        throw LayoutError(std::string("door '") + c + "' has no matching key");

  g.cell_at.assign(g.width * g.height, -1);
  std::size_t start_cell = 0;
  for (std::size_t i = 0; i < g.height; ++i)
    for (std::size_t j = 0; j < g.width; ++j) {
      const char c = g.rows[i][j];
      if (c == '#') continue;
      if (c == 'S') start_cell = g.cells.size();
      g.cell_at[i * g.width + j] = static_cast<int>(g.cells.size());
      g.cells.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }

  const std::size_t F = g.flag_count(), S = g.cells.size() * F, A = 4;
  std::vector<std::vector<Outcome>> rows(S * A);
  std::vector<double> reward(S * A, -1.0);
  std::vector<std::size_t> observable(S);
  g.terminal.assign(S, false);
  Labels labels;
  labels.actions.assign(kActionNames, kActionNames + 4);
  for (std::size_t cell = 0; cell < g.cells.size(); ++cell) {
    const auto [i, j] = g.cells[cell];
    for (unsigned f = 0; f < F; ++f) {
      const StateId s = g.state(cell, f);
      observable[s] = cell;
      std::string name = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
      if (F > 1) {
        name += '|';
        for (std::size_t k = 0; k < g.keys.size(); ++k) name += (f >> k & 1) ? g.keys[k] : '-';
      }
      labels.states.push_back(std::move(name));
      const bool target = g.rows[i][j] == 'T';
      g.terminal[s] = target;
      for (ActionId a = 0; a < A; ++a) {
        StateId next = s;
        if (target) {
          reward[s * A + a] = 0.0;
        } else {
          const int ni = i + kMove[a][0], nj = j + kMove[a][1];
          if (ni >= 0 && nj >= 0 && ni < int(g.height) && nj < int(g.width)) {
            const char c = g.rows[ni][nj];
            const int ncell = g.cell_at[ni * g.width + nj];
            const bool locked =
                is_door(c) && !(f >> g.keys.find(static_cast<char>(c - 'A' + 'a')) & 1);
            if (ncell >= 0 && !locked) {
              unsigned nf = f;
              if (is_key(c)) nf |= 1u << g.keys.find(c);
              next = g.state(static_cast<std::size_t>(ncell), nf);
            }
          }
        }
        rows[s * A + a].push_back({next, 1.0});
      }
    }
  }
  std::vector<double> sigma(S, 0.0);
  sigma[g.state(start_cell, 0)] = 1.0;
  g.env = Environment(S, A, std::move(sigma), std::move(rows), std::move(labels));
  g.reward = RewardTable(S, A, std::move(reward));
  g.classes = DecisionClasses(std::move(observable));

  const auto reach = reachable_states(g.env);
  bool solvable = false;
  for (StateId s = 0; s < S; ++s) solvable = solvable || (reach[s] && g.terminal[s]);
  if (!solvable) throw LayoutError("target is unreachable from the start");
  return g;
}

GridWorld load_gridworld(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open layout file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_gridworld(buf.str());
}

}  // namespace stratlink
