#pragma once

#include <optional>
#include <vector>

#include "stratlink/planners.hpp"

namespace stratlink {

// Arterial road J1..JJ with a parallel highway; at every junction traffic
// either stays on the arterial or takes the on-ramp to the highway.
struct ArterialSpec {
  int junctions = 10;
  double entry_flow = 2.0;  // f0, vehicles per time step
  int quantization = 100;   // grid points on [0,1] for actions and on [0,f0] for flows
  double length = 1000.0;
  double highway_speed = 20.0;
  double arterial_speed = 0.0;  // 0 selects 20 * sqrt(J/(J+1))
  // BPR congestion T(f) = length/speed * (1 + alpha (f/capacity)^power); alpha 0 is free flow.
  double alpha = 0.0;
  double power = 4.0;
  double arterial_capacity = 3.0;
  double highway_capacity = 4.0;
  double ramp_capacity = 1.2;

  void validate() const;
  double arterial_free_speed() const;
  double arterial_time(double f) const;  // T_A
  double highway_time(double f) const;   // T_H
  double ramp_time(double f) const;
};

struct ArterialMdp {
  ArterialSpec spec;
  Environment env;
  RewardTable reward;  // negated flow-weighted travel time, closure applied
  std::vector<double> action_values;  // descending: index 0 stays fully on the arterial
  std::vector<double> flow_values;    // ascending grid on [0, f0]
  std::vector<bool> terminal;

  std::size_t q() const { return static_cast<std::size_t>(spec.quantization); }
  // Junction i is 1-based.
  StateId state(int junction, std::size_t flow_index) const {
    return static_cast<StateId>(junction - 1) * q() + flow_index;
  }
  StateId exit_state() const { return static_cast<StateId>(spec.junctions) * q(); }
  StateId entry_state() const { return state(1, q() - 1); }
  std::vector<StateId> junction_states(int junction) const;
  // Grid index nearest to flow f * a for flow index qf and action k (exact integer rounding).
  std::size_t next_flow_index(std::size_t qf, std::size_t k) const;
};

// Forbids every a > 0 at the given junction.
ConstraintSet closure_constraint(const ArterialMdp& mdp, int junction);

ArterialMdp build_arterial_mdp(const ArterialSpec& spec,
                               const std::optional<ConstraintSet>& closure = std::nullopt);

}  // namespace stratlink
