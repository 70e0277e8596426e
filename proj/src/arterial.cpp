#include "stratlink/arterial.hpp"

#include <cmath>
#include <string>

#include "stratlink/format.hpp"
#include "stratlink/linkscore.hpp"

namespace stratlink {

void ArterialSpec::validate() const {
  if (junctions < 1) throw InputError("need at least one junction");
  if (!(entry_flow > 0.0)) throw InputError("entry flow must be positive");
  if (quantization < 2) throw InputError("quantization needs at least two points");
  if (!(length > 0.0 && highway_speed > 0.0 && arterial_speed >= 0.0))
    throw InputError("lengths and speeds must be positive");
  if (!(alpha >= 0.0 && power > 0.0)) throw InputError("congestion parameters must be non-negative");
  if (!(arterial_capacity > 0.0 && highway_capacity > 0.0 && ramp_capacity > 0.0))
    throw InputError("capacities must be positive");
}

double ArterialSpec::arterial_free_speed() const {
  if (arterial_speed > 0.0) return arterial_speed;
  return highway_speed * std::sqrt(double(junctions) / double(junctions + 1));
}

namespace {
double bpr(double t0, double f, double cap, double alpha, double power) {
  return alpha == 0.0 ? t0 : t0 * (1.0 + alpha * std::pow(f / cap, power));
}
}  // namespace

double ArterialSpec::arterial_time(double f) const {
  return bpr(length / arterial_free_speed(), f, arterial_capacity, alpha, power);
}
double ArterialSpec::highway_time(double f) const {
  return bpr(length / highway_speed, f, highway_capacity, alpha, power);
}
double ArterialSpec::ramp_time(double f) const {
  return bpr(length / highway_speed, f, ramp_capacity, alpha, power);
}

std::vector<StateId> ArterialMdp::junction_states(int junction) const {
  std::vector<StateId> out;
  for (std::size_t k = 0; k < q(); ++k) out.push_back(state(junction, k));
  return out;
}

std::size_t ArterialMdp::next_flow_index(std::size_t qf, std::size_t k) const {
  // f * a / f0 * (Q-1) = qf * (Q-1-k) / (Q-1), rounded half up.
  const std::size_t m = q() - 1;
  return (2 * qf * (m - k) + m) / (2 * m);
}

ConstraintSet closure_constraint(const ArterialMdp& mdp, int junction) {
  if (junction < 1 || junction > mdp.spec.junctions)
    throw InputError("closure junction J" + std::to_string(junction) + " does not exist");
  return region_constraint(mdp.junction_states(junction), mdp.action_values, ActionInterval{});
}

ArterialMdp build_arterial_mdp(const ArterialSpec& spec,
                               const std::optional<ConstraintSet>& closure) {
  spec.validate();
  ArterialMdp m;
  m.spec = spec;
  const std::size_t Q = m.q(), J = static_cast<std::size_t>(spec.junctions);
  const std::size_t S = J * Q + 1, A = Q;
  const double f0 = spec.entry_flow;
  for (std::size_t k = 0; k < Q; ++k) m.action_values.push_back(1.0 - double(k) / double(Q - 1));
  for (std::size_t k = 0; k < Q; ++k) m.flow_values.push_back(f0 * double(k) / double(Q - 1));
  m.flow_values.back() = f0;  // exact, whatever the rounding above

  std::vector<std::vector<Outcome>> rows(S * A);
  std::vector<double> reward(S * A, 0.0);
  Labels labels;
  for (std::size_t k = 0; k < Q; ++k) labels.actions.push_back("a=" + format_double(m.action_values[k]));
  for (std::size_t i = 1; i <= J; ++i)
    for (std::size_t qf = 0; qf < Q; ++qf) {
      const StateId s = m.state(static_cast<int>(i), qf);
      labels.states.push_back("J" + std::to_string(i) + "|f=" + format_double(m.flow_values[qf]));
      const double f = m.flow_values[qf];
      for (std::size_t k = 0; k < A; ++k) {
        const std::size_t qn = m.next_flow_index(qf, k);
        const double fa = m.flow_values[qn];  // snapped arterial flow
        const double fr = f - fa;             // on-ramp flow, conserved exactly
        const double fh = f0 - fa;            // highway flow after the merge
        reward[s * A + k] = -(fa * spec.arterial_time(fa) + fr * spec.highway_time(fr) +
                              fh * spec.highway_time(fh));
        const StateId next = i == J ? m.exit_state() : m.state(static_cast<int>(i + 1), qn);
        rows[s * A + k].push_back({next, 1.0});
      }
    }
  labels.states.push_back("exit");
  for (std::size_t k = 0; k < A; ++k) rows[m.exit_state() * A + k].push_back({m.exit_state(), 1.0});
  m.terminal.assign(S, false);
  m.terminal[m.exit_state()] = true;

  std::vector<double> sigma(S, 0.0);
  sigma[m.entry_state()] = 1.0;
  m.env = Environment(S, A, std::move(sigma), std::move(rows), std::move(labels));
  m.reward = RewardTable(S, A, std::move(reward));
  if (closure) m.reward = apply_constraint(m.reward, *closure);
  return m;
}

}  // namespace stratlink
