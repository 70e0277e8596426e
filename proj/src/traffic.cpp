#include "stratlink/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <map>
#include <set>
#include <ostream>
#include <sstream>

#include "stratlink/rng.hpp"

namespace stratlink {

RoutingResult optimal_routing(const ArterialSpec& spec, std::optional<int> closure) {
  ArterialMdp mdp = build_arterial_mdp(spec);
  if (closure) mdp.reward = apply_constraint(mdp.reward, closure_constraint(mdp, *closure));
  const PlannerConfig config{1.0, 1.0, spec.junctions + 1, PlannerMode::hard};
  const Policy policy = hard_value_iteration(mdp.env, mdp.reward, config);

  RoutingResult out;
  for (StateId s = 0; s < mdp.env.state_count(); ++s) out.flow_dependent.push_back(policy.greedy(s));
  std::size_t qf = mdp.q() - 1;
  for (int i = 1; i <= spec.junctions; ++i) {
    const StateId s = mdp.state(i, qf);
    const std::size_t k = out.flow_dependent[s];
    out.total_time -= mdp.reward(s, k);
    qf = mdp.next_flow_index(qf, k);
    out.policy.stay.push_back(mdp.action_values[k]);
    out.arterial_flow.push_back(mdp.flow_values[qf]);
    out.highway_flow.push_back(spec.entry_flow - mdp.flow_values[qf]);
  }
  return out;
}

std::vector<double> junction_link_scores(const FlowPolicy& pre, const FlowPolicy& post) {
  if (pre.stay.size() != post.stay.size()) throw InputError("policies cover different junctions");
  std::vector<double> out(pre.stay.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pre.stay[i] - post.stay[i];
  return out;
}

void CountSeries::validate() const {
  if (arterial.size() != highway.size() || arterial.empty())
    throw InputError("count series needs arterial and highway columns per junction");
  for (std::size_t j = 0; j < arterial.size(); ++j) {
    for (const auto* col : {&arterial[j], &highway[j]}) {
      if (col->size() != time.size()) throw InputError("count column length mismatch");
      if (!std::is_sorted(col->begin(), col->end()))
        throw InputError("cumulative counts must be non-decreasing");
    }
  }
  if (!std::is_sorted(time.begin(), time.end())) throw InputError("time must be increasing");
  if (time.size() < 2 || !(time.front() < intervention && intervention < time.back()))
    throw InputError("intervention must lie strictly inside the series");
}

void write_counts(std::ostream& out, const CountSeries& c) {
  out << "# intervention " << c.intervention << '\n' << "# time";
  for (std::size_t j = 1; j <= c.junctions(); ++j) out << " A" << j << " H" << j;
  out << '\n';
  for (std::size_t t = 0; t < c.time.size(); ++t) {
    out << c.time[t];
    for (std::size_t j = 0; j < c.junctions(); ++j)
      out << ' ' << c.arterial[j][t] << ' ' << c.highway[j][t];
    out << '\n';
  }
}

CountSeries read_counts(std::istream& in) {
  CountSeries c;
  bool have_intervention = false;
  std::string line;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, key;
      ls >> hash >> key;
      if (key == "intervention") {
        if (!(ls >> c.intervention)) throw InputError("bad intervention header");
        have_intervention = true;
      }
      continue;
    }
    std::vector<long> values;
    long v;
    while (ls >> v) values.push_back(v);
    if (!ls.eof()) throw InputError("non-numeric entry in count series");
    if (columns == 0) {
      if (values.size() < 3 || values.size() % 2 == 0)
        throw InputError("count rows need time plus arterial/highway pairs");
      columns = values.size();
      c.arterial.resize((columns - 1) / 2);
      c.highway.resize((columns - 1) / 2);
    } else if (values.size() != columns) {
      throw InputError("ragged count series");
    }
    c.time.push_back(values[0]);
    for (std::size_t j = 0; j < c.arterial.size(); ++j) {
      c.arterial[j].push_back(values[1 + 2 * j]);
      c.highway[j].push_back(values[2 + 2 * j]);
    }
  }
  if (!have_intervention) throw InputError("count series lacks an intervention header");
  c.validate();
  return c;
}

namespace {

double slope(const std::vector<long>& t, const std::vector<long>& y, double lo, double hi) {
  double n = 0, st = 0, sy = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= lo && t[i] <= hi) {
      n += 1;
      st += double(t[i]);
      sy += double(y[i]);
    }
  if (n < 2) throw InputError("fewer than two samples in a slope window");
  const double mt = st / n, my = sy / n;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= lo && t[i] <= hi) {
      num += (double(t[i]) - mt) * (double(y[i]) - my);
      den += (double(t[i]) - mt) * (double(t[i]) - mt);
    }
  return num / den;
}

}  // namespace

ExtractedPolicies extract_policies(const CountSeries& counts, const ExtractionConfig& config) {
  counts.validate();
  if (!(config.settle_fraction >= 0.0 && config.settle_fraction < 1.0))
    throw InputError("settle fraction must lie in [0,1)");
  const double t0 = double(counts.time.front()), tc = double(counts.intervention);
  const double t1 = double(counts.time.back());
  // Pre window stops one sample short of the intervention.
  const double pre_hi = std::nextafter(tc, t0);
  const double post_lo = tc + config.settle_fraction * (t1 - tc);
  ExtractedPolicies out;
  for (std::size_t j = 0; j < counts.junctions(); ++j) {
    const struct { double lo, hi; FlowPolicy* dst; const char* name; } windows[] = {
        {t0, pre_hi, &out.pre, "pre"}, {post_lo, t1, &out.post, "post"}};
    for (const auto& w : windows) {
      const double a = slope(counts.time, counts.arterial[j], w.lo, w.hi);
      const double h = slope(counts.time, counts.highway[j], w.lo, w.hi);
      if (!(a + h > 0.0))
        throw DegenerateError("no flow through J" + std::to_string(j + 1) + " in the " + w.name +
                              "-intervention window");
      w.dst->stay.push_back(std::clamp(a / (a + h), 0.0, 1.0));
    }
  }
  return out;
}

void SimConfig::validate() const {
  if (update_period < 1) throw InputError("update period must be at least one step");
  if (!(update_weight > 0.0 && update_weight <= 1.0)) throw InputError("update weight must lie in (0,1]");
  if (!(noise > 0.0)) throw InputError("noise must be positive");
  if (!(flow_window >= 1.0)) throw InputError("flow window must be at least one step");
  if (record_stride < 1) throw InputError("record stride must be at least one");
}

namespace {

// Links: arterial A_i leaves junction i, ramp R_i leads from junction i to the
// highway, highway H_i follows the merge of R_i. Indices 0-based.
struct Link {
  double free_time = 0.0;
  double capacity = 0.0;
  double credit = 0.0;      // admissions available this step
  double inflow_rate = 0.0; // smoothed vehicles per step
  long entered_now = 0;
  double estimate = 0.0;    // shared travel-time estimate
  double observed_sum = 0.0;
  long observed_count = 0;
  std::multiset<long> occupants;    // entry times of vehicles on the link
  std::deque<std::size_t> waiting;  // vehicles queued for admission
};

struct Vehicle {
  std::size_t link = 0;   // current link, or the link just finished while waiting
  long entered = 0;
  bool on_network = false;
};

}  // namespace

CountSeries simulate_drivers(const ArterialSpec& spec, const SimConfig& sim, long closure_time,
                             long horizon, std::uint64_t seed) {
  spec.validate();
  sim.validate();
  if (horizon < 2 || closure_time <= 0 || closure_time >= horizon)
    throw InputError("closure time must fall strictly inside the horizon");
  const std::size_t J = static_cast<std::size_t>(spec.junctions);
  auto A = [](std::size_t i) { return i; };
  auto R = [J](std::size_t i) { return J + i; };
  auto H = [J](std::size_t i) { return 2 * J + i; };

  std::vector<Link> links(3 * J);
  for (std::size_t i = 0; i < J; ++i) {
    links[A(i)].free_time = spec.arterial_time(0.0);
    links[A(i)].capacity = spec.arterial_capacity;
    links[R(i)].free_time = spec.ramp_time(0.0);
    links[R(i)].capacity = spec.ramp_capacity;
    links[H(i)].free_time = spec.highway_time(0.0);
    links[H(i)].capacity = spec.highway_capacity;
  }
  for (auto& l : links) l.estimate = l.free_time;
  // Free-flow remainder of the usual route after the next link.
  std::vector<double> stay_rest(J), divert_rest(J);
  for (std::size_t i = 0; i < J; ++i) {
    stay_rest[i] = double(J - 1 - i) * links[A(0)].free_time;
    divert_rest[i] = double(J - i) * links[H(0)].free_time;
  }

  auto travel_time = [&](const Link& l, std::size_t id) {
    const double t = id < J       ? spec.arterial_time(l.inflow_rate)
                     : id < 2 * J ? spec.ramp_time(l.inflow_rate)
                                  : spec.highway_time(l.inflow_rate);
    return std::max<long>(1, std::lround(t));
  };

  Rng rng(seed);
  std::vector<Vehicle> vehicles;
  std::map<long, std::vector<std::size_t>> arrivals;  // time -> vehicles reaching a link end
  std::vector<long> stay_count(J, 0), divert_count(J, 0);
  CountSeries out;
  out.intervention = closure_time;
  out.arterial.assign(J, {});
  out.highway.assign(J, {});
  double spawn_credit = 0.0;

  auto leave = [&](std::size_t v, long t) {
    Vehicle& veh = vehicles[v];
    Link& l = links[veh.link];
    l.observed_sum += double(t - veh.entered);
    l.observed_count++;
    l.occupants.erase(l.occupants.find(veh.entered));
    veh.on_network = false;
  };

  // Vehicle v stands at junction i: choose, count, and queue for the next link.
  auto decide = [&](std::size_t v, std::size_t i, long t) {
    const bool closed = i + 1 == J && t >= closure_time;
    bool stay = false;
    if (!closed) {
      const double u_stay = links[A(i)].estimate + stay_rest[i];
      const double u_divert = links[R(i)].estimate + divert_rest[i];
      const double p = 1.0 / (1.0 + std::exp((u_stay - u_divert) / sim.noise));
      stay = rng.uniform() < p;
    }
    (stay ? stay_count : divert_count)[i]++;
    links[stay ? A(i) : R(i)].waiting.push_back(v);
  };

  for (long t = 0; t < horizon; ++t) {
    spawn_credit += spec.entry_flow;
    while (spawn_credit >= 1.0) {
      spawn_credit -= 1.0;
      vehicles.push_back({});
      decide(vehicles.size() - 1, 0, t);
    }

    if (auto it = arrivals.find(t); it != arrivals.end()) {
      for (std::size_t v : it->second) {
        const std::size_t l = vehicles[v].link;
        if (l < J) {
          if (l + 1 == J) {  // arterial exit
            leave(v, t);
          } else {
            decide(v, l + 1, t);
          }
        } else if (l < 2 * J) {
          links[H(l - J)].waiting.push_back(v);
        } else if (l + 1 < 3 * J) {
          links[l + 1].waiting.push_back(v);
        } else {  // highway exit
          leave(v, t);
        }
      }
      arrivals.erase(it);
    }

    for (std::size_t id = 0; id < links.size(); ++id) {
      Link& l = links[id];
      l.credit = std::min(l.credit + l.capacity, std::max(l.capacity, 1.0));
      while (!l.waiting.empty() && l.credit >= 1.0) {
        const std::size_t v = l.waiting.front();
        l.waiting.pop_front();
        l.credit -= 1.0;
        Vehicle& veh = vehicles[v];
        if (veh.on_network) leave(v, t);  // queueing counts toward the link just left
        veh.link = id;
        veh.entered = t;
        veh.on_network = true;
        l.occupants.insert(t);
        l.entered_now++;
        arrivals[t + travel_time(l, id)].push_back(v);
      }
    }
    for (auto& l : links) {
      l.inflow_rate += (double(l.entered_now) - l.inflow_rate) / sim.flow_window;
      l.entered_now = 0;
    }

    if ((t + 1) % sim.update_period == 0) {
      for (std::size_t id = 0; id < links.size(); ++id) {
        Link& l = links[id];
        // Nothing finished: report what a newcomer would see, or the oldest
        // vehicle's elapsed time if it is already stuck for longer.
        double seen = double(travel_time(l, id));
        if (l.observed_count > 0) seen = l.observed_sum / double(l.observed_count);
        else if (!l.occupants.empty()) seen = std::max(seen, double(t + 1 - *l.occupants.begin()));
        l.estimate += sim.update_weight * (seen - l.estimate);
        l.observed_sum = 0.0;
        l.observed_count = 0;
      }
    }

    if (t % sim.record_stride == 0 || t + 1 == horizon) {
      out.time.push_back(t);
      for (std::size_t i = 0; i < J; ++i) {
        out.arterial[i].push_back(stay_count[i]);
        out.highway[i].push_back(divert_count[i]);
      }
    }
  }
  return out;
}

}  // namespace stratlink
