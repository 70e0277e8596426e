#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stratlink/arterial.hpp"

namespace stratlink {

// Arterial-stay frequency per junction, index 0 = J1.
struct FlowPolicy {
  std::vector<double> stay;
};

struct RoutingResult {
  FlowPolicy policy;                 // pi*(J_i) from the rollout
  std::vector<double> arterial_flow; // f_A,Ji
  std::vector<double> highway_flow;  // f_H,Ji = f0 - f_A,Ji
  std::vector<std::size_t> flow_dependent;  // pi*(J_i, f) as action index, per MDP state
  double total_time = 0.0;           // flow-weighted travel time of the rollout
};

// Build the flow-augmented MDP, solve it by hard value iteration, roll out from f0.
RoutingResult optimal_routing(const ArterialSpec& spec, std::optional<int> closure = std::nullopt);

std::vector<double> junction_link_scores(const FlowPolicy& pre, const FlowPolicy& post);

// Cumulative counts sampled at `time`; index [junction][sample].
struct CountSeries {
  std::vector<long> time;
  std::vector<std::vector<long>> arterial;
  std::vector<std::vector<long>> highway;
  long intervention = 0;

  std::size_t junctions() const { return arterial.size(); }
  void validate() const;
};

void write_counts(std::ostream& out, const CountSeries& counts);
CountSeries read_counts(std::istream& in);

struct ExtractionConfig {
  double settle_fraction = 0.1;  // of the post-intervention span, skipped before fitting
};

struct ExtractedPolicies {
  FlowPolicy pre, post;
};

// Least-squares slopes of the cumulative counts before and after the intervention.
ExtractedPolicies extract_policies(const CountSeries& counts, const ExtractionConfig& config = {});

struct SimConfig {
  int update_period = 20;      // steps between travel-time estimate refreshes
  double update_weight = 0.5;  // weight of the new observation in the refresh
  double noise = 5.0;          // logit temperature, in time steps
  double flow_window = 200.0;  // smoothing horizon of measured link inflow (BPR input)
  int record_stride = 1;

  void validate() const;
};

// Vehicles enter J1 at rate f0. At each junction a driver compares the
// current estimate of the next link (arterial or on-ramp) plus free-flow time
// for the rest of the usual route. Links admit at most `capacity` vehicles per
// step, so a saturated ramp queues vehicles on the link before it. The
// arterial after the last junction closes at `closure_time`.
CountSeries simulate_drivers(const ArterialSpec& spec, const SimConfig& sim, long closure_time,
                             long horizon, std::uint64_t seed);

}  // namespace stratlink
