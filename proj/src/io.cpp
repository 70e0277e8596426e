#include "stratlink/io.hpp"

#include <fstream>

namespace stratlink {

namespace {

double number(const Json& v) {
  if (v.is_string() && v.get<std::string>() == "-inf") return kNegInf;
  if (!v.is_number()) throw InputError("expected a number or \"-inf\"");
  return v.get<double>();
}

Json encode(double x) { return is_neg_inf(x) ? Json("-inf") : Json(x); }

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed JSON document: ") + e.what());
  }
}

}  // namespace

Json reward_to_json(const RewardTable& reward) {
  Json rows = Json::array();
  for (StateId s = 0; s < reward.state_count(); ++s) {
    Json row = Json::array();
    for (ActionId a = 0; a < reward.action_count(); ++a) row.push_back(encode(reward(s, a)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json environment_to_json(const Environment& env, const RewardTable* reward) {
  const std::size_t S = env.state_count(), A = env.action_count();
  Json doc;
  doc["states"] = S;
  doc["actions"] = A;
  doc["sigma"] = env.initial_dist();
  Json tau = Json::array();
  for (StateId s = 0; s < S; ++s) {
    Json per_action = Json::array();
    for (ActionId a = 0; a < A; ++a) {
      std::vector<double> row(S, 0.0);
      for (const auto& o : env.outcomes(s, a)) row[o.next] += o.prob;
      per_action.push_back(row);
    }
    tau.push_back(std::move(per_action));
  }
  doc["tau"] = std::move(tau);
  if (reward) doc["reward"] = reward_to_json(*reward);
  doc["labels"] = {{"states", env.labels().states}, {"actions", env.labels().actions}};
  return doc;
}

Environment environment_from_json(const Json& doc) {
  return guarded([&] {
    const auto S = doc.at("states").get<std::size_t>();
    const auto A = doc.at("actions").get<std::size_t>();
    if (S == 0 || A == 0) throw InputError("environment needs states and actions");
    auto sigma = doc.at("sigma").get<std::vector<double>>();
    const auto tau = doc.at("tau").get<std::vector<std::vector<std::vector<double>>>>();
    Labels labels;
    if (doc.contains("labels")) {
      const auto& l = doc.at("labels");
      if (l.contains("states")) labels.states = l.at("states").get<std::vector<std::string>>();
      if (l.contains("actions")) labels.actions = l.at("actions").get<std::vector<std::string>>();
    }
    Environment env = Environment::from_dense(S, A, std::move(sigma), tau, std::move(labels));
    const auto problems = validate_environment(env);
    if (!problems.empty()) throw InputError("invalid environment: " + problems.front());
    return env;
  });
}

RewardTable reward_from_json(const Json& doc, const Environment& env) {
  return guarded([&] {
    const std::size_t S = env.state_count(), A = env.action_count();
    if (!doc.contains("reward")) return RewardTable(S, A, 0.0);
    const auto& rows = doc.at("reward");
    if (!rows.is_array() || rows.size() != S) throw InputError("reward needs one row per state");
    std::vector<double> values;
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != A) throw InputError("reward row needs one entry per action");
      for (const auto& v : row) values.push_back(number(v));
    }
    return RewardTable(S, A, std::move(values));
  });
}

Json to_json(const PlannerConfig& c) {
  return {{"gamma", c.gamma}, {"beta", c.beta}, {"iterations", c.iterations}, {"mode", to_string(c.mode)}};
}

Json to_json(const ShortcutsSpec& spec) {
  Json shortcuts = Json::array();
  for (const auto& sc : spec.shortcuts)
    shortcuts.push_back({{"from", sc.from}, {"to", sc.to}, {"required", sc.required}});
  return {{"nodes", spec.nodes},          {"preps", spec.preps},
          {"cost", spec.cost},            {"shortcuts", std::move(shortcuts)},
          {"prep_nodes", spec.prep_nodes}};
}

ShortcutsSpec shortcuts_spec_from_json(const Json& doc) {
  return guarded([&] {
    ShortcutsSpec spec;
    spec.nodes = doc.at("nodes").get<int>();
    spec.preps = doc.at("preps").get<int>();
    spec.cost = doc.at("cost").get<double>();
    for (const auto& sc : doc.at("shortcuts"))
      spec.shortcuts.push_back(
          {sc.at("from").get<int>(), sc.at("to").get<int>(), sc.at("required").get<std::vector<int>>()});
    if (doc.contains("prep_nodes")) spec.prep_nodes = doc.at("prep_nodes").get<std::vector<int>>();
    else spec.prep_nodes.assign(static_cast<std::size_t>(std::max(spec.preps, 0)), 1);
    spec.validate();
    return spec;
  });
}

Json to_json(const ArterialSpec& s) {
  return {{"junctions", s.junctions},
          {"entry_flow", s.entry_flow},
          {"quantization", s.quantization},
          {"length", s.length},
          {"highway_speed", s.highway_speed},
          {"arterial_speed", s.arterial_free_speed()},
          {"alpha", s.alpha},
          {"power", s.power},
          {"arterial_capacity", s.arterial_capacity},
          {"highway_capacity", s.highway_capacity},
          {"ramp_capacity", s.ramp_capacity}};
}

ArterialSpec arterial_spec_from_json(const Json& doc) {
  return guarded([&] {
    ArterialSpec s;
    auto take = [&](const char* key, auto& field) {
      if (doc.contains(key)) field = doc.at(key).get<std::decay_t<decltype(field)>>();
    };
    take("junctions", s.junctions);
    take("entry_flow", s.entry_flow);
    take("quantization", s.quantization);
    take("length", s.length);
    take("highway_speed", s.highway_speed);
    take("arterial_speed", s.arterial_speed);
    take("alpha", s.alpha);
    take("power", s.power);
    take("arterial_capacity", s.arterial_capacity);
    take("highway_capacity", s.highway_capacity);
    take("ramp_capacity", s.ramp_capacity);
    s.validate();
    return s;
  });
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace stratlink
