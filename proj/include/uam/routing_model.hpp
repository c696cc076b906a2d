#pragma once

// Routing and recharging model: connection costs between consecutive
// services, state-of-charge simulation along a route, and the penalized
// objective used by the local search.

#include <cassert>
#include <span>
#include <unordered_map>

#include "uam/core.hpp"

namespace uam {

/// Where and when an aircraft becomes available: the arrival of its last
/// served request, or its start of day.
struct Endpoint {
  int location = 0;
  double time = 0.0;
};

inline Endpoint arrival_of(const FlightRequest& r) { return {r.destination, r.arrive_minute}; }
inline Endpoint start_of(const Aircraft& a) { return {a.start_vertiport, a.start_minute}; }

/// Everything the model needs to know about serving `next` right after `prev`.
struct Connection {
  bool feasible = false;
  bool deadhead = false;
  double cost = std::numeric_limits<double>::infinity();
  double deadhead_energy = 0.0;
  double service_energy = 0.0;
  double per_leg_cap = 0.0;  // bound on each charging duration
  double joint_cap = 0.0;    // bound on their sum
};

/// Charging-time bounds of a connection: each of the two durations, and
/// their sum. Both are clamped at zero.
struct ChargeBounds {
  double per_leg = 0.0;
  double joint = 0.0;
};

inline ChargeBounds charge_time_bounds(Endpoint prev, const FlightRequest& next,
                                       const Network& net, double delta) {
  const bool deadhead = prev.location != next.origin;
  const double reposition = net.fly(prev.location, next.origin).value_or(0.0);
  const double window = next.depart_minute - prev.time - reposition;
  return {std::max(window - (deadhead ? delta : 0.0), 0.0), std::max(window, 0.0)};
}

inline Connection connect(Endpoint prev, const FlightRequest& next, const Network& net,
                          double eta, double delta) {
  Connection c;
  const auto service_fly = net.fly(next.origin, next.destination);
  const auto service_energy = net.consumption(next.origin, next.destination);
  if (!service_fly || !service_energy) return c;
  c.service_energy = *service_energy;
  c.deadhead = prev.location != next.origin;
  if (!c.deadhead) {
    if (prev.time + delta > next.depart_minute + kTimeEps) return c;
    c.cost = eta * *service_fly + net.fee(next.destination) - next.value;
  } else {
    const auto reposition = net.fly(prev.location, next.origin);
    const auto reposition_energy = net.consumption(prev.location, next.origin);
    if (!reposition || !reposition_energy) return c;
    if (prev.time + *reposition + 2.0 * delta > next.depart_minute + kTimeEps) return c;
    c.deadhead_energy = *reposition_energy;
    c.cost = eta * (*reposition + *service_fly) + net.fee(prev.location) +
             net.fee(next.destination) - next.value;
  }
  c.feasible = true;
  const auto bounds = charge_time_bounds(prev, next, net, delta);
  c.per_leg_cap = bounds.per_leg;
  c.joint_cap = bounds.joint;
  return c;
}

/// Monetary cost of activating the connection, or nullopt when there is not
/// enough time (including ground time) to make it.
inline std::optional<double> connection_cost(Endpoint prev, const FlightRequest& next,
                                             const Network& net, double eta, double delta) {
  const auto c = connect(prev, next, net, eta, delta);
  if (!c.feasible) return std::nullopt;
  return c.cost;
}

/// Route-level aggregates of one aircraft's route.
struct RouteEval {
  bool time_feasible = true;
  double connection_cost = 0.0;
  double bought = 0.0;
  int n_fast = 0;
  int n_charges = 0;
  double violation = 0.0;

  /// Route contribution to the penalized objective, unserved term excluded.
  [[nodiscard]] double penalized(double alpha_f, double price, double lambda) const {
    return n_fast * alpha_f + connection_cost + bought * price + lambda * violation;
  }
};

inline constexpr double kBoughtEps = 1e-6;

/// Instance plus precomputed connection table. Request ids map to dense
/// positions; connection(prev, next) takes positions, with prev in
/// [R, R + fleet) denoting an aircraft start.
class RoutingModel {
public:
  explicit RoutingModel(const RoutingInstance& inst) : inst_(&inst) {
    const auto n = inst.requests.size();
    int max_id = -1;
    for (const auto& r : inst.requests) max_id = std::max(max_id, r.id);
    pos_.assign(static_cast<std::size_t>(max_id + 1), -1);
    for (std::size_t i = 0; i < n; ++i) {
      const int id = inst.requests[i].id;
      if (id < 0) throw InvalidInput("negative request id");
      if (pos_[id] != -1) throw InvalidInput("duplicate request id " + std::to_string(id));
      pos_[id] = static_cast<int>(i);
    }
    const auto rows = n + inst.fleet.size();
    table_.resize(rows * n);
    for (std::size_t p = 0; p < rows; ++p) {
      const Endpoint prev = p < n ? arrival_of(inst.requests[p]) : start_of(inst.fleet[p - n]);
      for (std::size_t q = 0; q < n; ++q)
        table_[p * n + q] = connect(prev, inst.requests[q], inst.network, inst.config.eta,
                                    inst.config.delta);
    }
  }

  [[nodiscard]] const RoutingInstance& instance() const { return *inst_; }
  [[nodiscard]] std::size_t request_count() const { return inst_->requests.size(); }
  [[nodiscard]] std::size_t fleet_size() const { return inst_->fleet.size(); }

  [[nodiscard]] bool known(int id) const {
    return id >= 0 && static_cast<std::size_t>(id) < pos_.size() && pos_[id] >= 0;
  }
  [[nodiscard]] int position(int id) const {
    if (!known(id)) throw InvalidInput("unknown request id " + std::to_string(id));
    return pos_[id];
  }
  [[nodiscard]] const FlightRequest& request(int id) const {
    return inst_->requests[position(id)];
  }

  /// Connection entering visit `k` of `route` flown by aircraft `aircraft`.
  [[nodiscard]] const Connection& entering(std::size_t aircraft, std::span<const Visit> route,
                                           std::size_t k) const {
    const int next = position(route[k].request);
    const int prev = k == 0 ? static_cast<int>(request_count() + aircraft)
                            : position(route[k - 1].request);
    return table_[static_cast<std::size_t>(prev) * request_count() + next];
  }

  [[nodiscard]] const Connection& between(int prev_pos, int next_pos) const {
    return table_[static_cast<std::size_t>(prev_pos) * request_count() + next_pos];
  }
  [[nodiscard]] const Connection& from_start(std::size_t aircraft, int next_pos) const {
    return between(static_cast<int>(request_count() + aircraft), next_pos);
  }

  /// Walks the route forward from a full battery. Fills `trace` when given.
  RouteEval simulate(std::size_t aircraft, std::span<const Visit> route,
                     std::vector<SoCPoint>* trace = nullptr) const {
    const auto& bat = inst_->battery;
    RouteEval ev;
    if (trace) trace->clear();
    double e = bat.toc;
    for (std::size_t k = 0; k < route.size(); ++k) {
      const Connection& c = entering(aircraft, route, k);
      const ChargePlan& plan = route[k].plan;
      if (!c.feasible) {
        ev.time_feasible = false;
        ev.connection_cost = std::numeric_limits<double>::infinity();
      } else {
        ev.connection_cost += c.cost;
      }
      SoCPoint pt;
      pt.deadhead = c.deadhead;
      pt.bought_after = std::max(
          0.0, std::min(bat.toc - e, plan.duration_after * bat.rate(plan.slow_after)));
      const double before_base = e - c.deadhead_energy + pt.bought_after;
      pt.bought_before = std::max(
          0.0, std::min(bat.toc - before_base, plan.duration_before * bat.rate(plan.slow_before)));
      pt.e_deadhead_takeoff = e + pt.bought_after;
      pt.e_depart = before_base + pt.bought_before;
      pt.e_arrive = pt.e_depart - c.service_energy;

      ev.bought += pt.bought_after + pt.bought_before;
      if (c.deadhead) {
        ev.violation += std::max(0.0, bat.soc_min - pt.e_deadhead_takeoff);
        if (pt.bought_after > kBoughtEps) {
          ++ev.n_charges;
          if (!plan.slow_after) ++ev.n_fast;
        }
        if (pt.bought_before > kBoughtEps) {
          ++ev.n_charges;
          if (!plan.slow_before) ++ev.n_fast;
        }
      } else if (pt.bought_after + pt.bought_before > kBoughtEps) {
        // One ground stop: the two durations form a single charging session.
        ++ev.n_charges;
        if (!plan.slow_after) ++ev.n_fast;
      }
      ev.violation += std::max(0.0, bat.soc_min - pt.e_depart);
      e = pt.e_arrive;
      if (trace) trace->push_back(pt);
    }
    return ev;
  }

private:
  const RoutingInstance* inst_;
  std::vector<int> pos_;
  std::vector<Connection> table_;
};

inline std::vector<SoCPoint> simulate_soc(const RoutingModel& model, std::size_t aircraft,
                                          std::span<const Visit> route) {
  std::vector<SoCPoint> trace;
  model.simulate(aircraft, route, &trace);
  return trace;
}

inline SoCTrace simulate_soc(const RoutingModel& model, const RoutingSolution& sol) {
  SoCTrace t;
  for (std::size_t v = 0; v < sol.routes.size(); ++v)
    t.routes.push_back(simulate_soc(model, v, sol.routes[v]));
  return t;
}

/// Takeoff shortfall below SoC_min: service takeoffs plus deadhead takeoffs.
inline double soc_violation(std::span<const SoCPoint> trace, const BatteryParams& bat) {
  double v = 0.0;
  for (const auto& p : trace) {
    v += std::max(0.0, bat.soc_min - p.e_depart);
    if (p.deadhead) v += std::max(0.0, bat.soc_min - p.e_deadhead_takeoff);
  }
  return v;
}

struct SearchObjective {
  int n_unserved = 0;
  int n_fast = 0;
  double monetary = 0.0;
  double violation = 0.0;
  double scalar = 0.0;

  /// Lexicographic order on (unserved, fast charges, money).
  [[nodiscard]] bool lex_better(const SearchObjective& o, double tol = 1e-9) const {
    if (n_unserved != o.n_unserved) return n_unserved < o.n_unserved;
    if (n_fast != o.n_fast) return n_fast < o.n_fast;
    return monetary < o.monetary - tol * std::max(1.0, std::abs(o.monetary));
  }
};

/// Throws unless every request appears exactly once across routes and
/// unserved, with one route per aircraft.
inline void check_coherent(const RoutingModel& model, const RoutingSolution& sol) {
  if (sol.routes.size() != model.fleet_size())
    throw InvalidInput("solution has " + std::to_string(sol.routes.size()) +
                       " routes for a fleet of " + std::to_string(model.fleet_size()));
  std::vector<int> seen(model.request_count(), 0);
  auto mark = [&](int id) {
    if (++seen[model.position(id)] > 1)
      throw InvalidInput("request " + std::to_string(id) + " appears more than once");
  };
  for (const auto& r : sol.routes)
    for (const auto& v : r) mark(v.request);
  for (int id : sol.unserved) mark(id);
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i] == 0)
      throw InvalidInput("request " + std::to_string(model.instance().requests[i].id) +
                         " is neither routed nor unserved");
}

inline SearchObjective evaluate(const RoutingModel& model, const RoutingSolution& sol,
                                double lambda) {
  check_coherent(model, sol);
  const auto& inst = model.instance();
  SearchObjective o;
  o.n_unserved = static_cast<int>(sol.unserved.size());
  for (std::size_t v = 0; v < sol.routes.size(); ++v) {
    const auto ev = model.simulate(v, sol.routes[v]);
    o.n_fast += ev.n_fast;
    o.monetary += ev.connection_cost + ev.bought * inst.battery.price;
    o.violation += ev.violation;
  }
  o.scalar = o.n_unserved * inst.config.alpha_u + o.n_fast * inst.config.alpha_f + o.monetary +
             lambda * o.violation;
  return o;
}

/// Solution serving nothing; always valid.
inline RoutingSolution all_unserved(const RoutingInstance& inst) {
  RoutingSolution s;
  s.routes.resize(inst.fleet.size());
  for (const auto& r : inst.requests) s.unserved.push_back(r.id);
  std::sort(s.unserved.begin(), s.unserved.end());
  return s;
}

}  // namespace uam
