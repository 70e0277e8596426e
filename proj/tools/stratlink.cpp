// Command-line front end: explain, recommend, traffic {rl,sim,analyze}, irl.
// Exit codes: 0 ok, 2 bad input, 3 infeasible constraint, 4 degenerate data.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "stratlink/format.hpp"
#include "stratlink/gridworld.hpp"
#include "stratlink/io.hpp"
#include "stratlink/irl.hpp"
#include "stratlink/recommend.hpp"
#include "stratlink/rng.hpp"
#include "stratlink/traffic.hpp"

namespace fs = std::filesystem;
using namespace stratlink;

namespace {

constexpr const char* kVersion = "0.1.0";

// Files are buffered and written only once the whole run succeeded, so a
// failing command leaves nothing behind.
struct Output {
  std::map<std::string, std::string> files;

  void add(const std::string& name, std::string content) { files[name] = std::move(content); }
  void add_json(const std::string& name, const Json& doc) { add(name, doc.dump(2) + "\n"); }

  void commit(const fs::path& dir, const std::string& subcommand, Json config, std::uint64_t seed) {
    Json manifest;
    manifest["subcommand"] = subcommand;
    manifest["config"] = std::move(config);
    manifest["seed"] = seed;
    Json outputs = Json::array();
    for (const auto& [name, _] : files) outputs.push_back((dir / name).generic_string());
    outputs.push_back((dir / "manifest.json").generic_string());
    manifest["outputs"] = std::move(outputs);
    manifest["version"] = kVersion;
    add_json("manifest.json", manifest);
    fs::create_directories(dir);
    for (const auto& [name, content] : files) {
      std::ofstream out(dir / name, std::ios::binary);
      out << content;
      if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    }
  }
};

std::string num(double x) { return format_double(x); }

struct Globals {
  std::uint64_t seed = 0;
  std::string out = "out";
  unsigned threads = 1;
};

// ---- explain ---------------------------------------------------------------

struct ExplainArgs {
  std::string layout;
  PlannerConfig planner{0.99, 100.0, 250, PlannerMode::soft};
  std::string mode = "soft";
};

void run_explain(const Globals& g, ExplainArgs a) {
  a.planner.mode = planner_mode_from_string(a.mode);
  a.planner.validate();
  const GridWorld world = load_gridworld(a.layout);
  const ExplanationOptions options{world.classes, world.trajectory_options(), g.threads};
  const auto matrix = explanation_matrix(world.env, world.reward, a.planner, options);

  Output out;
  out.add("scores.txt", matrix.to_text());
  std::ostringstream traj;
  for (std::size_t t = 0; t < matrix.size(); ++t) {
    const auto d = matrix.trajectory().decisions[t];
    traj << t << ' ' << world.env.state_name(d.state) << ' ' << world.env.action_name(d.action) << '\n';
  }
  out.add("trajectory.txt", traj.str());
  Json config{{"layout", a.layout}, {"planner", to_json(a.planner)},
              {"truncated", matrix.trajectory().truncated}};
  out.commit(g.out, "explain", std::move(config), g.seed);
  if (matrix.trajectory().truncated)
    std::cerr << "warning: trajectory hit the horizon cap before the target\n";
}

// ---- recommend -------------------------------------------------------------

struct RecommendArgs {
  int n_envs = 100, nodes = 10, shortcuts = 5, preps = 5;
  double cost = 0.1, threshold = 0.0;
  int iterations = 0;
};

Json groups_json(const std::vector<std::vector<int>>& groups) { return groups; }

void run_recommend(const Globals& g, const RecommendArgs& a) {
  if (a.n_envs < 1) throw InputError("need at least one environment");
  if (a.threshold != 0.0 && !(a.threshold > 0.0 && a.threshold < 1.0))
    throw InputError("threshold must lie in (0,1)");
  if (a.iterations < 0) throw InputError("iterations must be non-negative");
  Rng seeds(g.seed);
  std::vector<ShortcutsSpec> specs;
  for (int i = 0; i < a.n_envs; ++i)
    specs.push_back(generate_shortcuts_spec(a.nodes, a.shortcuts, a.preps, a.cost, seeds.next()));
  const auto report = recommendation_report(specs, {a.threshold, a.iterations, g.threads});

  Output out;
  auto curve_file = [](const std::vector<CurvePoint>& c, bool worst) {
    std::string s;
    for (const auto& p : c) s += std::to_string(p.k) + ' ' + num(worst ? p.worst : p.average) + '\n';
    return s;
  };
  auto curve_json = [](const std::vector<CurvePoint>& c) {
    Json arr = Json::array();
    for (const auto& p : c)
      arr.push_back({{"k", p.k}, {"average", p.average}, {"worst", p.worst}, {"environments", p.environments}});
    return arr;
  };
  Json curves;
  for (auto m : kGroupingMethods) {
    const auto& c = report.curves.at(m);
    out.add(std::string(to_string(m)) + "_average.txt", curve_file(c, false));
    out.add(std::string(to_string(m)) + "_worst.txt", curve_file(c, true));
    curves[to_string(m)] = curve_json(c);
  }
  curves["all_or_nothing_filled"] = curve_json(report.all_or_nothing_filled);

  Json envs = Json::array();
  for (const auto& e : report.environments) {
    Json methods;
    for (const auto& [m, r] : e.methods) {
      Json by_k = Json::array();
      for (const auto& [k, s] : r.by_k) by_k.push_back({{"k", k}, {"average", s.average}, {"worst", s.worst}});
      Json entry{{"groups", groups_json(r.grouping.groups)}, {"by_k", std::move(by_k)}};
      if (m == GroupingMethod::strategy_aware) {
        entry["seed_groups"] = groups_json(r.grouping.seed_groups);
        entry["scores"] = r.grouping.scores;
        entry["threshold"] = r.grouping.threshold;
      }
      methods[to_string(m)] = std::move(entry);
    }
    envs.push_back({{"spec", to_json(e.spec)},
                    {"recommendations", e.recommendations.preps},
                    {"baseline", e.baseline},
                    {"optimal", e.optimal},
                    {"methods", std::move(methods)}});
  }
  out.add_json("summary.json",
               {{"baseline", report.baseline}, {"curves", std::move(curves)}, {"environments", std::move(envs)}});
  Json config{{"n_envs", a.n_envs}, {"nodes", a.nodes},         {"shortcuts", a.shortcuts},
              {"preps", a.preps},   {"cost", a.cost},           {"threshold", a.threshold},
              {"iterations", a.iterations}};
  out.commit(g.out, "recommend", std::move(config), g.seed);
}

// ---- traffic ---------------------------------------------------------------

struct TrafficArgs {
  std::string spec_file;
  ArterialSpec spec;
  std::map<std::string, CLI::Option*> rl_flags, sim_flags;
  std::string closure = "last";
  // sim
  long horizon = 50000, closure_time = 10000;
  SimConfig sim;
  // analyze
  std::string counts;
  double settle = 0.1;
};

ArterialSpec resolve_spec(const TrafficArgs& a, const std::map<std::string, CLI::Option*>& flags,
                          double default_alpha) {
  ArterialSpec spec;
  spec.alpha = default_alpha;
  if (!a.spec_file.empty()) spec = arterial_spec_from_json(read_json_file(a.spec_file));
  auto set = [&](const char* flag, auto& field, auto value) {
    if (flags.at(flag)->count() > 0) field = value;
  };
  set("--junctions", spec.junctions, a.spec.junctions);
  set("--entry-flow", spec.entry_flow, a.spec.entry_flow);
  set("--quantization", spec.quantization, a.spec.quantization);
  set("--alpha", spec.alpha, a.spec.alpha);
  set("--power", spec.power, a.spec.power);
  set("--length", spec.length, a.spec.length);
  spec.validate();
  return spec;
}

int parse_junction(const std::string& s, int junctions) {
  if (s == "last") return junctions;
  std::string digits = (!s.empty() && (s[0] == 'J' || s[0] == 'j')) ? s.substr(1) : s;
  try {
    std::size_t used = 0;
    const int j = std::stoi(digits, &used);
    if (used != digits.size()) throw InputError("");
    return j;
  } catch (const std::exception&) {
    throw InputError("bad junction '" + s + "' (use J<n> or <n>)");
  }
}

std::string policy_file(const FlowPolicy& p, const std::vector<double>* flows = nullptr) {
  std::string s;
  for (std::size_t j = 0; j < p.stay.size(); ++j) {
    s += "J" + std::to_string(j + 1) + ' ' + num(p.stay[j]);
    if (flows) s += ' ' + num((*flows)[j]);
    s += '\n';
  }
  return s;
}

std::string score_file(const std::vector<double>& scores) {
  std::string s;
  for (std::size_t j = 0; j < scores.size(); ++j) s += "J" + std::to_string(j + 1) + ' ' + num(scores[j]) + '\n';
  return s;
}

void run_traffic_rl(const Globals& g, const TrafficArgs& a) {
  const ArterialSpec spec = resolve_spec(a, a.rl_flags, 0.0);
  const int closure = parse_junction(a.closure, spec.junctions);
  const auto pre = optimal_routing(spec);
  const auto post = optimal_routing(spec, closure);
  Output out;
  out.add("pre_policy.txt", policy_file(pre.policy, &pre.arterial_flow));
  out.add("post_policy.txt", policy_file(post.policy, &post.arterial_flow));
  out.add("scores.txt", score_file(junction_link_scores(pre.policy, post.policy)));
  out.add_json("summary.json", {{"total_time_pre", pre.total_time}, {"total_time_post", post.total_time}});
  out.commit(g.out, "traffic rl", {{"spec", to_json(spec)}, {"closure", closure}}, g.seed);
}

void run_traffic_sim(const Globals& g, const TrafficArgs& a) {
  const ArterialSpec spec = resolve_spec(a, a.sim_flags, 0.15);
  const auto counts = simulate_drivers(spec, a.sim, a.closure_time, a.horizon, g.seed);
  std::ostringstream text;
  write_counts(text, counts);
  Output out;
  out.add("counts.txt", text.str());
  Json config{{"spec", to_json(spec)},
              {"horizon", a.horizon},
              {"closure_time", a.closure_time},
              {"update_period", a.sim.update_period},
              {"update_weight", a.sim.update_weight},
              {"noise", a.sim.noise},
              {"flow_window", a.sim.flow_window},
              {"record_stride", a.sim.record_stride}};
  out.commit(g.out, "traffic sim", std::move(config), g.seed);
}

void run_traffic_analyze(const Globals& g, const TrafficArgs& a) {
  std::ifstream in(a.counts);
  if (!in) throw InputError("cannot open " + a.counts);
  const auto counts = read_counts(in);
  const auto policies = extract_policies(counts, {a.settle});
  Output out;
  out.add("pre_policy.txt", policy_file(policies.pre));
  out.add("post_policy.txt", policy_file(policies.post));
  out.add("scores.txt", score_file(junction_link_scores(policies.pre, policies.post)));
  out.commit(g.out, "traffic analyze", {{"counts", a.counts}, {"settle_fraction", a.settle}}, g.seed);
}

// ---- irl -------------------------------------------------------------------

struct IrlArgs {
  std::string env = "gridworld";
  std::string layout;
  std::vector<double> betas = default_temperatures();
  std::size_t seeds = 5, demos = 1000;
  int iterations = 10000;
  double lr = 0.0;
  int n_envs = 10, nodes = 5, shortcuts = 3, preps = 3;
  double cost = 0.1;
  int junctions = 5, quantization = 10;
};

std::vector<IrlTask> irl_tasks(const Globals& g, const IrlArgs& a) {
  std::vector<IrlTask> tasks;
  if (a.env == "gridworld") {
    if (a.layout.empty()) throw InputError("--layout is required for the gridworld sweep");
    const GridWorld w = load_gridworld(a.layout);
    tasks.push_back({"gridworld", w.env, w.reward, w.classes, w.trajectory_options(),
                     w.width * w.height, a.lr > 0 ? a.lr : 1e-4});
  } else if (a.env == "shortcuts") {
    if (a.n_envs < 1) throw InputError("need at least one environment");
    Rng seeds(g.seed);
    for (int i = 0; i < a.n_envs; ++i) {
      const Shortcuts s = generate_shortcuts(a.nodes, a.shortcuts, a.preps, a.cost, seeds.next());
      tasks.push_back({"shortcuts" + std::to_string(i), s.env, s.reward, s.classes, s.trajectory_options(),
                       static_cast<std::size_t>(a.nodes * a.preps), a.lr > 0 ? a.lr : 1e-4});
    }
  } else if (a.env == "arterial") {
    ArterialSpec spec;
    spec.junctions = a.junctions;
    spec.quantization = a.quantization;
    const ArterialMdp m = build_arterial_mdp(spec);
    const std::size_t T = static_cast<std::size_t>(a.junctions + 1);
    tasks.push_back({"arterial", m.env, m.reward, DecisionClasses{}, {T, m.terminal, {}}, T,
                     a.lr > 0 ? a.lr : 5e-3});
  } else {
    throw InputError("unknown environment '" + a.env + "' (gridworld, shortcuts, arterial)");
  }
  return tasks;
}

void run_irl_cmd(const Globals& g, const IrlArgs& a) {
  if (a.betas.empty()) throw InputError("need at least one temperature");
  for (double b : a.betas)
    if (!(b > 0.0)) throw InputError("temperatures must be positive");
  if (a.seeds == 0 || a.demos == 0 || a.iterations < 0) throw InputError("seeds and demos must be positive");
  const auto tasks = irl_tasks(g, a);
  SweepConfig sweep{a.betas, a.seeds, a.demos, a.iterations, g.seed, g.threads};
  const auto result = irl_sweep(tasks, sweep);

  Output out;
  std::string epic = "# beta mean lower upper\n", mse = epic;
  Json points = Json::array();
  for (const auto& p : result.points) {
    epic += num(p.beta) + ' ' + num(p.epic_mean) + ' ' + num(p.epic_mean - p.epic_std) + ' ' +
            num(p.epic_mean + p.epic_std) + '\n';
    mse += num(p.beta) + ' ' + num(p.mse_mean) + ' ' + num(p.mse_mean - p.mse_std) + ' ' +
           num(p.mse_mean + p.mse_std) + '\n';
    points.push_back({{"beta", p.beta},
                      {"epic_mean", p.epic_mean},
                      {"epic_std", p.epic_std},
                      {"epic_undefined", p.epic_undefined},
                      {"score_mse_mean", p.mse_mean},
                      {"score_mse_std", p.mse_std}});
  }
  out.add("epic.txt", epic);
  out.add("score_mse.txt", mse);
  Json runs = Json::array();
  for (std::size_t b = 0; b < result.runs.size(); ++b)
    for (std::size_t k = 0; k < result.runs[b].size(); ++k)
      for (std::size_t t = 0; t < result.runs[b][k].size(); ++t) {
        const auto& r = result.runs[b][k][t];
        runs.push_back({{"task", tasks[t].name},
                        {"seed_index", k},
                        {"seed", r.seed},
                        {"temperature", r.beta},
                        {"epic", r.epic ? Json(*r.epic) : Json(nullptr)},
                        {"score_mse", r.score_mse},
                        {"loss_curve", r.curve}});
      }
  out.add_json("runs.json", runs);
  out.add_json("summary.json", {{"points", points}, {"epic_distributions", "uniform states and actions"}});
  Json config{{"env", a.env},       {"layout", a.layout},         {"betas", a.betas},
              {"seeds", a.seeds},   {"demos", a.demos},           {"iterations", a.iterations},
              {"tasks", tasks.size()}, {"learning_rate", tasks.front().learning_rate}};
  out.commit(g.out, "irl", std::move(config), g.seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strategic link scores for planning agents"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  ExplainArgs ex;
  auto* explain = app.add_subcommand("explain", "score matrix along the most likely GridWorld trajectory");
  explain->add_option("layout", ex.layout, "layout file")->required();
  explain->add_option("--gamma", ex.planner.gamma)->capture_default_str();
  explain->add_option("--beta", ex.planner.beta)->capture_default_str();
  explain->add_option("--iters", ex.planner.iterations)->capture_default_str();
  explain->add_option("--mode", ex.mode, "soft, hard or stationary")->capture_default_str();

  RecommendArgs rec;
  auto* recommend = app.add_subcommand("recommend", "recommendation curves over generated Shortcuts environments");
  recommend->add_option("--n-envs", rec.n_envs)->capture_default_str();
  recommend->add_option("--nodes,-N", rec.nodes)->capture_default_str();
  recommend->add_option("--shortcuts,-I", rec.shortcuts)->capture_default_str();
  recommend->add_option("--preps,-J", rec.preps)->capture_default_str();
  recommend->add_option("--cost,-C", rec.cost)->capture_default_str();
  recommend->add_option("--threshold", rec.threshold, "0 selects 1/(2J)")->capture_default_str();
  recommend->add_option("--iters", rec.iterations, "0 selects 2(N+J)")->capture_default_str();

  TrafficArgs tr;
  auto* traffic = app.add_subcommand("traffic", "arterial/highway routing");
  traffic->require_subcommand(1);
  auto add_spec_flags = [&](CLI::App* sub, std::map<std::string, CLI::Option*>& flags) {
    sub->add_option("--spec", tr.spec_file, "ArterialSpec JSON");
    flags["--junctions"] = sub->add_option("--junctions", tr.spec.junctions);
    flags["--entry-flow"] = sub->add_option("--entry-flow", tr.spec.entry_flow);
    flags["--quantization"] = sub->add_option("--quantization", tr.spec.quantization);
    flags["--alpha"] = sub->add_option("--alpha", tr.spec.alpha, "BPR congestion factor");
    flags["--power"] = sub->add_option("--power", tr.spec.power);
    flags["--length"] = sub->add_option("--length", tr.spec.length);
  };
  auto* rl = traffic->add_subcommand("rl", "optimal routing before and after a closure");
  add_spec_flags(rl, tr.rl_flags);
  rl->add_option("--closure", tr.closure, "closed junction, e.g. J10")->capture_default_str();
  auto* sim = traffic->add_subcommand("sim", "simulated drivers, closure after the last junction");
  add_spec_flags(sim, tr.sim_flags);
  sim->add_option("--horizon", tr.horizon)->capture_default_str();
  sim->add_option("--closure-time", tr.closure_time)->capture_default_str();
  sim->add_option("--update-period", tr.sim.update_period)->capture_default_str();
  sim->add_option("--update-weight", tr.sim.update_weight)->capture_default_str();
  sim->add_option("--noise", tr.sim.noise)->capture_default_str();
  sim->add_option("--flow-window", tr.sim.flow_window)->capture_default_str();
  sim->add_option("--record-stride", tr.sim.record_stride)->capture_default_str();
  auto* analyze = traffic->add_subcommand("analyze", "policies and scores from junction counts");
  analyze->add_option("--counts", tr.counts, "count series file")->required();
  analyze->add_option("--settle", tr.settle, "skipped fraction after the intervention")->capture_default_str();

  IrlArgs ia;
  auto* irl = app.add_subcommand("irl", "MaxEnt IRL temperature sweep");
  irl->add_option("--env", ia.env, "gridworld, shortcuts or arterial")->capture_default_str();
  irl->add_option("--layout", ia.layout, "GridWorld layout file");
  irl->add_option("--betas", ia.betas, "inverse temperatures")->delimiter(',');
  irl->add_option("--seeds", ia.seeds)->capture_default_str();
  irl->add_option("--demos", ia.demos)->capture_default_str();
  irl->add_option("--iters", ia.iterations)->capture_default_str();
  irl->add_option("--lr", ia.lr, "0 selects the per-environment default");
  irl->add_option("--n-envs", ia.n_envs)->capture_default_str();
  irl->add_option("--nodes", ia.nodes)->capture_default_str();
  irl->add_option("--shortcuts", ia.shortcuts)->capture_default_str();
  irl->add_option("--preps", ia.preps)->capture_default_str();
  irl->add_option("--cost", ia.cost)->capture_default_str();
  irl->add_option("--junctions", ia.junctions)->capture_default_str();
  irl->add_option("--quantization", ia.quantization)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (explain->parsed()) run_explain(g, ex);
    else if (recommend->parsed()) run_recommend(g, rec);
    else if (rl->parsed()) run_traffic_rl(g, tr);
    else if (sim->parsed()) run_traffic_sim(g, tr);
    else if (analyze->parsed()) run_traffic_analyze(g, tr);
    else if (irl->parsed()) run_irl_cmd(g, ia);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return 3;
  } catch (const DegenerateError& e) {
    std::cerr << "degenerate data: " << e.what() << '\n';
    return 4;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
