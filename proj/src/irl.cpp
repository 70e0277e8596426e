#include "stratlink/irl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stratlink/rng.hpp"

namespace stratlink {

DemoSet sample_demonstrations(const Environment& env, const RewardTable& reward,
                              const PlannerConfig& config, std::size_t count, std::size_t horizon,
                              std::uint64_t seed) {
  if (count == 0 || horizon == 0) throw InputError("demo count and horizon must be positive");
  const Policy policy = plan(env, reward, config);
  DemoSet demos;
  demos.horizon = horizon;
  demos.beta = config.beta;
  demos.gamma = config.gamma;
  Rng seeds(seed);
  demos.trajectories.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    demos.trajectories.push_back(rollout(env, policy, horizon, seeds.next()));
  return demos;
}

void IrlConfig::validate() const {
  if (iterations < 0) throw InputError("iteration count must be non-negative");
  if (!(learning_rate > 0.0 && learning_rate < 1.0)) throw InputError("learning rate must lie in (0,1)");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0 && adam_beta2 > 0.0 && adam_beta2 < 1.0))
    throw InputError("Adam moment decay must lie in (0,1)");
  if (!(adam_eps > 0.0)) throw InputError("Adam epsilon must be positive");
  if (!(beta > 0.0)) throw InputError("inverse temperature must be positive");
}

namespace {

void check_demos(const Environment& env, const DemoSet& demos) {
  if (demos.trajectories.empty()) throw InputError("no demonstrations");
  for (const auto& tr : demos.trajectories) {
    if (tr.decisions.size() != demos.horizon) throw InputError("demonstrations differ in length");
    for (const auto& d : tr.decisions)
      if (d.state >= env.state_count() || d.action >= env.action_count())
        throw InputError("demonstration leaves the environment");
  }
}

// Time-indexed soft policy over T steps with no terminal value:
// log pi_t(a|s) = beta * (Q_t(s,a) - V_t(s)), layout [t][s][a].
std::vector<double> finite_horizon_log_policy(const Environment& env, const RewardTable& reward,
                                              std::size_t T, double beta) {
  const std::size_t S = env.state_count(), A = env.action_count();
  std::vector<double> logp(T * S * A);
  std::vector<double> v_next(S, 0.0), v(S), q(A);
  for (std::size_t t = T; t-- > 0;) {
    for (StateId s = 0; s < S; ++s) {
      double m = kNegInf;
      for (ActionId a = 0; a < A; ++a) {
        double x = reward(s, a);
        for (const auto& o : env.outcomes(s, a)) x += o.prob * v_next[o.next];
        q[a] = x;
        m = std::max(m, x);
      }
      double z = 0.0;
      for (ActionId a = 0; a < A; ++a) z += std::exp(beta * (q[a] - m));
      v[s] = m + std::log(z) / beta;
      for (ActionId a = 0; a < A; ++a) logp[(t * S + s) * A + a] = beta * (q[a] - v[s]);
    }
    std::swap(v, v_next);
  }
  return logp;
}

}  // namespace

std::vector<double> demo_visitation(const Environment& env, const DemoSet& demos) {
  check_demos(env, demos);
  const std::size_t A = env.action_count();
  std::vector<double> mu(env.state_count() * A, 0.0);
  const double w = 1.0 / double(demos.trajectories.size());
  for (const auto& tr : demos.trajectories)
    for (const auto& d : tr.decisions) mu[d.state * A + d.action] += w;
  return mu;
}

std::vector<double> expected_visitation(const Environment& env, const RewardTable& reward,
                                        const DemoSet& demos, double beta) {
  check_demos(env, demos);
  const std::size_t S = env.state_count(), A = env.action_count(), T = demos.horizon;
  const auto logp = finite_horizon_log_policy(env, reward, T, beta);
  std::vector<double> d(S, 0.0), next(S);
  for (const auto& tr : demos.trajectories) d[tr.decisions.front().state] += 1.0;
  for (double& x : d) x /= double(demos.trajectories.size());
  std::vector<double> mu(S * A, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (StateId s = 0; s < S; ++s) {
      if (d[s] == 0.0) continue;
      for (ActionId a = 0; a < A; ++a) {
        const double w = d[s] * std::exp(logp[(t * S + s) * A + a]);
        mu[s * A + a] += w;
        for (const auto& o : env.outcomes(s, a)) next[o.next] += w * o.prob;
      }
    }
    std::swap(d, next);
  }
  return mu;
}

std::vector<double> maxent_gradient(const Environment& env, const RewardTable& reward,
                                    const DemoSet& demos, double beta) {
  auto g = demo_visitation(env, demos);
  const auto mu = expected_visitation(env, reward, demos, beta);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= mu[i];
  return g;
}

double demo_log_likelihood(const Environment& env, const RewardTable& reward,
                           const DemoSet& demos, double beta) {
  check_demos(env, demos);
  const std::size_t S = env.state_count(), A = env.action_count();
  const auto logp = finite_horizon_log_policy(env, reward, demos.horizon, beta);
  double total = 0.0;
  for (const auto& tr : demos.trajectories)
    for (std::size_t t = 0; t < tr.decisions.size(); ++t) {
      const auto& d = tr.decisions[t];
      total += logp[(t * S + d.state) * A + d.action];
    }
  return total / double(demos.trajectories.size());
}

RewardTable maxent_irl(const Environment& env, const DemoSet& demos, const IrlConfig& config,
                       std::vector<double>* curve) {
  config.validate();
  check_demos(env, demos);
  const std::size_t S = env.state_count(), A = env.action_count();
  RewardTable r(S, A, 0.0);
  std::vector<double> theta(S * A, 0.0), m(S * A, 0.0), v(S * A, 0.0);
  const auto mu_demo = demo_visitation(env, demos);
  const int every = std::max(1, config.iterations / 100);
  double b1t = 1.0, b2t = 1.0;
  for (int it = 0; it < config.iterations; ++it) {
    if (curve && it % every == 0) curve->push_back(demo_log_likelihood(env, r, demos, config.beta));
    const auto mu = expected_visitation(env, r, demos, config.beta);
    b1t *= config.adam_beta1;
    b2t *= config.adam_beta2;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g = mu_demo[i] - mu[i];
      if (!std::isfinite(g)) throw DegenerateError("non-finite IRL gradient");
      m[i] = config.adam_beta1 * m[i] + (1.0 - config.adam_beta1) * g;
      v[i] = config.adam_beta2 * v[i] + (1.0 - config.adam_beta2) * g * g;
      const double mh = m[i] / (1.0 - b1t), vh = v[i] / (1.0 - b2t);
      theta[i] += config.learning_rate * mh / (std::sqrt(vh) + config.adam_eps);
    }
    r = RewardTable(S, A, theta);
  }
  if (curve) curve->push_back(demo_log_likelihood(env, r, demos, config.beta));
  return r;
}

TransitionReward TransitionReward::lift(const RewardTable& r) {
  TransitionReward out;
  out.states = r.state_count();
  out.actions = r.action_count();
  out.values.resize(out.states * out.actions * out.states);
  for (StateId s = 0; s < out.states; ++s)
    for (ActionId a = 0; a < out.actions; ++a)
      std::fill_n(out.values.begin() + static_cast<std::ptrdiff_t>((s * out.actions + a) * out.states),
                  out.states, r(s, a));
  return out;
}

namespace {

// C(s,a,s') = R(s,a,s') + E[g R(s',A,S') - R(s,A,S') - g R(S,A,S')], S, S', A
// independent and uniform.
std::vector<double> canonicalise(const TransitionReward& r, double gamma) {
  const std::size_t S = r.states, A = r.actions;
  std::vector<double> from(S, 0.0);  // E_{A,S'} R(x, A, S')
  for (StateId s = 0; s < S; ++s) {
    double acc = 0.0;
    for (std::size_t i = (s * A) * S; i < (s * A + A) * S; ++i) acc += r.values[i];
    from[s] = acc / double(A * S);
  }
  double mean = 0.0;
  for (double x : from) mean += x;
  mean /= double(S);
  std::vector<double> c(r.values.size());
  for (StateId s = 0; s < S; ++s)
    for (ActionId a = 0; a < A; ++a)
      for (StateId n = 0; n < S; ++n) {
        const std::size_t i = (s * A + a) * S + n;
        c[i] = r.values[i] + gamma * from[n] - from[s] - gamma * mean;
      }
  return c;
}

}  // namespace

std::optional<double> epic_distance(const TransitionReward& r1, const TransitionReward& r2,
                                    const EpicConfig& config) {
  if (r1.states != r2.states || r1.actions != r2.actions || r1.values.size() != r2.values.size() ||
      r1.values.size() != r1.states * r1.actions * r1.states || r1.values.empty())
    throw InputError("EPIC needs rewards of the same shape");
  for (const auto* r : {&r1, &r2})
    for (double x : r->values)
      if (!std::isfinite(x)) throw InputError("EPIC needs finite rewards");
  if (!(config.gamma >= 0.0 && config.gamma <= 1.0)) throw InputError("EPIC discount must lie in [0,1]");
  const auto c1 = canonicalise(r1, config.gamma), c2 = canonicalise(r2, config.gamma);
  const double n = double(c1.size());
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < c1.size(); ++i) {
    m1 += c1[i];
    m2 += c2[i];
  }
  m1 /= n;
  m2 /= n;
  double v1 = 0.0, v2 = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < c1.size(); ++i) {
    const double x = c1[i] - m1, y = c2[i] - m2;
    v1 += x * x;
    v2 += y * y;
    cov += x * y;
  }
  // Relative cut-off so round-off from cancelled shaping does not count as variance.
  double scale1 = 0.0, scale2 = 0.0;
  for (std::size_t i = 0; i < c1.size(); ++i) {
    scale1 = std::max(scale1, std::abs(r1.values[i]));
    scale2 = std::max(scale2, std::abs(r2.values[i]));
  }
  const double tol = 1e-24 * n;
  if (v1 <= tol * std::max(1.0, scale1 * scale1) || v2 <= tol * std::max(1.0, scale2 * scale2))
    return std::nullopt;
  const double rho = std::clamp(cov / std::sqrt(v1 * v2), -1.0, 1.0);
  return std::sqrt((1.0 - rho) / 2.0);
}

std::optional<double> epic_distance(const RewardTable& r1, const RewardTable& r2,
                                    const Environment& env, const EpicConfig& config) {
  if (r1.state_count() != env.state_count() || r1.action_count() != env.action_count())
    throw InputError("reward shape does not match the environment");
  return epic_distance(TransitionReward::lift(r1), TransitionReward::lift(r2), config);
}

double inferred_score_error(const std::vector<double>& truth, const std::vector<double>& inferred) {
  if (truth.size() != inferred.size()) throw InputError("score shapes differ");
  if (truth.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) acc += (truth[i] - inferred[i]) * (truth[i] - inferred[i]);
  return acc / double(truth.size());
}

double inferred_score_error(const LinkScoreMatrix& truth, const LinkScoreMatrix& inferred) {
  if (truth.size() != inferred.size()) throw InputError("score matrices differ in size");
  return inferred_score_error(truth.values(), inferred.values());
}

IrlRun run_irl(const IrlTask& task, double beta, std::size_t demos, int iterations,
               std::uint64_t seed) {
  const PlannerConfig planner{0.99, beta, static_cast<int>(task.horizon), PlannerMode::soft};
  const DemoSet set = sample_demonstrations(task.env, task.reward, planner, demos, task.horizon, seed);
  IrlConfig config;
  config.iterations = iterations;
  config.learning_rate = task.learning_rate;
  config.beta = beta;
  IrlRun run;
  run.beta = beta;
  run.seed = seed;
  const RewardTable inferred = maxent_irl(task.env, set, config, &run.curve);
  run.epic = epic_distance(task.reward, inferred, task.env);
  const Trajectory path = most_likely_trajectory(task.env, task.reward, planner, task.trajectory);
  const auto truth = score_trajectory(task.env, task.reward, planner, path, task.classes);
  const auto guess = score_trajectory(task.env, inferred, planner, path, task.classes);
  run.score_mse = inferred_score_error(truth, guess);
  return run;
}

std::vector<double> default_temperatures() {
  std::vector<double> out;
  for (int i = 1; i <= 9; ++i) out.push_back(0.2 * i);
  return out;
}

SweepResult irl_sweep(const std::vector<IrlTask>& tasks, const SweepConfig& config) {
  if (tasks.empty() || config.betas.empty() || config.seeds == 0)
    throw InputError("sweep needs tasks, temperatures and seeds");
  const std::size_t B = config.betas.size(), K = config.seeds, T = tasks.size();
  // Seeds are drawn up front so results do not depend on scheduling.
  Rng master(config.seed);
  std::vector<std::uint64_t> seeds(B * K * T);
  for (auto& s : seeds) s = master.next();
  SweepResult out;
  out.runs.assign(B, std::vector<std::vector<IrlRun>>(K, std::vector<IrlRun>(T)));
  parallel_for(B * K * T, config.threads, [&](std::size_t i) {
    const std::size_t b = i / (K * T), k = i / T % K, t = i % T;
    out.runs[b][k][t] = run_irl(tasks[t], config.betas[b], config.demos, config.iterations, seeds[i]);
  });
  for (std::size_t b = 0; b < B; ++b) {
    SweepPoint p;
    p.beta = config.betas[b];
    std::vector<double> epic, mse;
    for (std::size_t k = 0; k < K; ++k) {
      double e = 0.0, m = 0.0;
      int defined = 0;
      for (const auto& run : out.runs[b][k]) {
        m += run.score_mse;
        if (run.epic) {
          e += *run.epic;
          ++defined;
        } else {
          ++p.epic_undefined;
        }
      }
      mse.push_back(m / double(T));
      if (defined > 0) epic.push_back(e / defined);
    }
    auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
      if (v.empty()) {
        mean = sd = std::numeric_limits<double>::quiet_NaN();
        return;
      }
      mean = 0.0;
      for (double x : v) mean += x;
      mean /= double(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      sd = std::sqrt(var / double(v.size()));
    };
    stats(epic, p.epic_mean, p.epic_std);
    stats(mse, p.mse_mean, p.mse_std);
    out.points.push_back(p);
  }
  return out;
}

}  // namespace stratlink
