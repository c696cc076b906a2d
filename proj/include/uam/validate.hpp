#pragma once

// Solution validators. Constraint violations are reported; structural
// problems (unknown ids, legs outside the network) throw InvalidInput.

#include <sstream>

#include "uam/pooling.hpp"
#include "uam/routing_model.hpp"

namespace uam {

enum class PoolingConstraint {
  Capacity,
  Assignment,
  Deadline,
  MaxWait,
  Quantile,
  DepartureNotMax,
};

inline const char* to_string(PoolingConstraint c) {
  switch (c) {
    case PoolingConstraint::Capacity: return "capacity";
    case PoolingConstraint::Assignment: return "assignment";
    case PoolingConstraint::Deadline: return "deadline";
    case PoolingConstraint::MaxWait: return "max-wait";
    case PoolingConstraint::Quantile: return "quantile";
    case PoolingConstraint::DepartureNotMax: return "departure-not-max";
  }
  return "?";
}

struct PoolingViolation {
  PoolingConstraint constraint;
  int group = -1;
  int demand = -1;
  std::string detail;
};

inline std::vector<PoolingViolation> validate_pooling(const PoolingSolution& sol,
                                                      std::span<const Demand> demands,
                                                      const PoolingConfig& cfg) {
  DemandIndex index(demands);
  if (sol.groups.size() != sol.departures.size())
    throw InvalidInput("pooling solution: groups and departures differ in length");
  for (const auto& g : sol.groups)
    for (int id : g) (void)index.at(id);

  std::vector<PoolingViolation> out;
  auto report = [&](PoolingConstraint c, int g, int d, std::string why) {
    out.push_back({c, g, d, std::move(why)});
  };

  std::unordered_map<int, int> count;
  for (const auto& g : sol.groups)
    for (int id : g) ++count[id];
  for (const auto& d : demands) {
    const int n = count.count(d.id) ? count[d.id] : 0;
    if (n != 1) report(PoolingConstraint::Assignment, -1, d.id, "assigned " + std::to_string(n) + " times");
  }

  for (std::size_t k = 0; k < sol.groups.size(); ++k) {
    const auto& g = sol.groups[k];
    const int gk = static_cast<int>(k);
    if (g.empty()) continue;
    const double f = sol.departures[k];
    int pax = 0;
    double max_q = -std::numeric_limits<double>::infinity();
    for (int id : g) {
      const Demand& d = index.at(id);
      pax += d.passengers;
      max_q = std::max(max_q, d.arrival.quantile());
      if (f + kTimeEps < d.arrival.quantile())
        report(PoolingConstraint::Quantile, gk, id, "departs before boarding quantile");
      if (d.latest_departure && f > *d.latest_departure + kTimeEps)
        report(PoolingConstraint::Deadline, gk, id, "departs after latest departure");
      if (f - d.arrival.mean_minute > cfg.max_wait(d.cls) + kTimeEps)
        report(PoolingConstraint::MaxWait, gk, id, "expected wait above class limit");
    }
    if (pax > cfg.capacity)
      report(PoolingConstraint::Capacity, gk, -1, std::to_string(pax) + " passengers");
    if (f > max_q + kTimeEps)
      report(PoolingConstraint::DepartureNotMax, gk, -1, "departure later than latest quantile");
  }
  return out;
}

enum class RoutingConstraint {
  Assignment,
  Timing,
  ChargeTime,
  SoCBounds,
  TakeoffMinimum,
  ModeTie,
};

inline const char* to_string(RoutingConstraint c) {
  switch (c) {
    case RoutingConstraint::Assignment: return "assignment";
    case RoutingConstraint::Timing: return "timing";
    case RoutingConstraint::ChargeTime: return "charge-time";
    case RoutingConstraint::SoCBounds: return "soc-bounds";
    case RoutingConstraint::TakeoffMinimum: return "takeoff-minimum";
    case RoutingConstraint::ModeTie: return "mode-tie";
  }
  return "?";
}

struct RoutingViolation {
  RoutingConstraint constraint;
  int aircraft = -1;
  int request = -1;
  std::string detail;
};

inline std::vector<RoutingViolation> validate_routing(const RoutingSolution& sol,
                                                      const RoutingModel& model) {
  const auto& inst = model.instance();
  const auto& bat = inst.battery;
  if (sol.routes.size() != inst.fleet.size())
    throw InvalidInput("routing solution: one route per aircraft expected");
  for (const auto& r : sol.routes)
    for (const auto& v : r) {
      const auto& req = model.request(v.request);
      if (!inst.network.has_leg(req.origin, req.destination))
        throw InvalidInput("request " + std::to_string(req.id) + " flies a leg outside E");
    }
  for (int id : sol.unserved) (void)model.position(id);

  std::vector<RoutingViolation> out;
  auto report = [&](RoutingConstraint c, int a, int r, std::string why) {
    out.push_back({c, a, r, std::move(why)});
  };

  std::vector<int> seen(model.request_count(), 0);
  for (const auto& r : sol.routes)
    for (const auto& v : r) ++seen[model.position(v.request)];
  for (int id : sol.unserved) ++seen[model.position(id)];
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i] != 1)
      report(RoutingConstraint::Assignment, -1, inst.requests[i].id,
             "appears " + std::to_string(seen[i]) + " times");

  constexpr double tol = 1e-9;
  for (std::size_t a = 0; a < sol.routes.size(); ++a) {
    const auto& route = sol.routes[a];
    const int ai = static_cast<int>(a);
    std::vector<SoCPoint> trace;
    model.simulate(a, route, &trace);
    for (std::size_t k = 0; k < route.size(); ++k) {
      const int rid = route[k].request;
      const Connection& c = model.entering(a, route, k);
      const ChargePlan& p = route[k].plan;
      if (!c.feasible) {
        report(RoutingConstraint::Timing, ai, rid, "not enough time to connect");
        continue;
      }
      if (p.duration_after < 0.0 || p.duration_before < 0.0 ||
          p.duration_after > c.per_leg_cap + tol || p.duration_before > c.per_leg_cap + tol ||
          p.duration_after + p.duration_before > c.joint_cap + tol)
        report(RoutingConstraint::ChargeTime, ai, rid, "charging exceeds available time");
      if (!c.deadhead && p.slow_after != p.slow_before)
        report(RoutingConstraint::ModeTie, ai, rid, "mode change without a landing");
      const auto& pt = trace[k];
      for (double e : {pt.e_depart, pt.e_arrive})
        if (e < bat.boc - tol || e > bat.toc + tol)
          report(RoutingConstraint::SoCBounds, ai, rid, "state of charge out of [BoC, ToC]");
      if (c.deadhead) {
        const double after_dh = pt.e_deadhead_takeoff - c.deadhead_energy;
        if (pt.e_deadhead_takeoff > bat.toc + tol || after_dh < bat.boc - tol)
          report(RoutingConstraint::SoCBounds, ai, rid, "deadhead leaves [BoC, ToC]");
        if (pt.e_deadhead_takeoff < bat.soc_min - tol)
          report(RoutingConstraint::TakeoffMinimum, ai, rid, "deadhead takeoff below SoC_min");
      }
      if (pt.e_depart < bat.soc_min - tol)
        report(RoutingConstraint::TakeoffMinimum, ai, rid, "service takeoff below SoC_min");
    }
  }
  return out;
}

template <typename Violation>
std::string describe(const std::vector<Violation>& vs) {
  std::ostringstream os;
  for (const auto& v : vs) os << to_string(v.constraint) << " (" << v.detail << "); ";
  return os.str();
}

}  // namespace uam
