#pragma once

// Domain types shared by the pooling, routing, oracle and online layers.
//
// Time is real-valued minutes from midnight, state of charge (SoC) is in
// abstract battery units and money is in dollars.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace uam {

/// Malformed input: unknown ids, inconsistent sizes, legs outside the network.
class InvalidInput : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A demand whose latest departure precedes its boarding quantile.
class UnservableDemand : public InvalidInput {
public:
  using InvalidInput::InvalidInput;
};

/// Request outside the size or data limits of an exact solver.
class OracleRefusal : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kTimeEps = 1e-9;

// ---------------------------------------------------------------------------
// Pooling side
// ---------------------------------------------------------------------------

enum class DemandClass : std::uint8_t { Regular, Premium };

inline const char* to_string(DemandClass c) {
  return c == DemandClass::Premium ? "premium" : "regular";
}

/// Expected arrival at the origin vertiport plus the offset to the boarding
/// quantile (the time by which the passenger is present with high
/// probability).
struct ArrivalProfile {
  double mean_minute = 0.0;
  double quantile_offset = 0.0;

  [[nodiscard]] double quantile() const { return mean_minute + quantile_offset; }
  bool operator==(const ArrivalProfile&) const = default;
};

struct Demand {
  int id = 0;
  int passengers = 1;
  ArrivalProfile arrival;
  std::optional<double> latest_departure;
  DemandClass cls = DemandClass::Regular;

  bool operator==(const Demand&) const = default;
};

struct PoolingConfig {
  int capacity = 4;
  double t_regular = 25.0;
  double t_premium = 15.0;
  double alpha_regular = 1.0;
  double alpha_premium = 2.0;
  /// Cost of opening one group. Zero selects the default derived from the
  /// instance size, see resolved_lambda().
  double lambda_p = 0.0;
  int beam_width = 1000;

  [[nodiscard]] double max_wait(DemandClass c) const {
    return c == DemandClass::Premium ? t_premium : t_regular;
  }
  [[nodiscard]] double alpha(DemandClass c) const {
    return c == DemandClass::Premium ? alpha_premium : alpha_regular;
  }

  /// Group penalty that strictly dominates any achievable total weighted
  /// wait over `n_demands` demands.
  [[nodiscard]] double resolved_lambda(std::size_t n_demands) const {
    if (lambda_p > 0.0) return lambda_p;
    const double amax = std::max(alpha_regular, alpha_premium);
    const double n = static_cast<double>(std::max<std::size_t>(n_demands, 1));
    return 10.0 * n * t_regular * (amax > 0.0 ? amax : 1.0);
  }

  void check() const {
    if (capacity < 1) throw InvalidInput("pooling: capacity must be >= 1");
    if (beam_width < 1) throw InvalidInput("pooling: beam width must be >= 1");
    if (t_premium > t_regular)
      throw InvalidInput("pooling: t_premium must not exceed t_regular");
    if (t_premium < 0.0) throw InvalidInput("pooling: negative wait limit");
    if (alpha_regular < 0.0 || alpha_premium < 0.0)
      throw InvalidInput("pooling: negative class weight");
    if (lambda_p < 0.0) throw InvalidInput("pooling: negative lambda_p");
  }
};

/// Rejects demands that cannot be placed in any flight, including alone.
inline void check_demand(const Demand& d, const PoolingConfig& cfg) {
  if (d.id < 0) throw InvalidInput("demand ids must be non-negative");
  if (d.passengers < 1 || d.passengers > cfg.capacity)
    throw InvalidInput("demand " + std::to_string(d.id) + ": passenger count " +
                       std::to_string(d.passengers) + " outside [1, capacity]");
  if (!(d.arrival.quantile_offset >= 0.0) || !std::isfinite(d.arrival.mean_minute))
    throw InvalidInput("demand " + std::to_string(d.id) + ": bad arrival profile");
  if (d.latest_departure && *d.latest_departure + kTimeEps < d.arrival.quantile())
    throw UnservableDemand("demand " + std::to_string(d.id) +
                           ": latest departure precedes boarding quantile");
  if (d.arrival.quantile_offset > cfg.max_wait(d.cls) + kTimeEps)
    throw UnservableDemand("demand " + std::to_string(d.id) +
                           ": quantile offset exceeds the class wait limit");
}

struct PoolingSolution {
  std::vector<std::vector<int>> groups;
  std::vector<double> departures;

  bool operator==(const PoolingSolution&) const = default;
};

// ---------------------------------------------------------------------------
// Routing side
// ---------------------------------------------------------------------------

struct Vertiport {
  int id = 0;
  double landing_fee = 0.0;
  double open_minute = 420.0;
  double close_minute = 1140.0;

  bool operator==(const Vertiport&) const = default;
};

/// Vertiports, bookable legs and the fly-time / energy matrices. Matrix
/// entries may be defined for pairs outside `legs`: those can be flown as
/// deadheads but not booked.
struct Network {
  std::vector<Vertiport> vertiports;
  std::vector<std::pair<int, int>> legs;
  std::vector<std::vector<std::optional<double>>> fly_time;
  std::vector<std::vector<std::optional<double>>> energy;

  [[nodiscard]] std::size_t size() const { return vertiports.size(); }

  [[nodiscard]] bool valid_vertiport(int v) const {
    return v >= 0 && static_cast<std::size_t>(v) < vertiports.size();
  }

  [[nodiscard]] bool has_leg(int from, int to) const {
    return std::find(legs.begin(), legs.end(), std::pair{from, to}) != legs.end();
  }

  [[nodiscard]] std::optional<double> fly(int from, int to) const {
    if (!valid_vertiport(from) || !valid_vertiport(to)) return std::nullopt;
    if (from == to) return 0.0;
    return fly_time[from][to];
  }

  [[nodiscard]] std::optional<double> consumption(int from, int to) const {
    if (!valid_vertiport(from) || !valid_vertiport(to)) return std::nullopt;
    if (from == to) return 0.0;
    return energy[from][to];
  }

  [[nodiscard]] double fee(int v) const { return vertiports.at(v).landing_fee; }

  void check() const {
    const auto n = vertiports.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (vertiports[i].id != static_cast<int>(i))
        throw InvalidInput("network: vertiport ids must equal their position");
      if (vertiports[i].landing_fee < 0.0)
        throw InvalidInput("network: negative landing fee");
      if (!(vertiports[i].open_minute < vertiports[i].close_minute))
        throw InvalidInput("network: vertiport opens after it closes");
    }
    if (fly_time.size() != n || energy.size() != n)
      throw InvalidInput("network: matrix size mismatch");
    for (std::size_t i = 0; i < n; ++i)
      if (fly_time[i].size() != n || energy[i].size() != n)
        throw InvalidInput("network: matrix size mismatch");
    for (auto [a, b] : legs) {
      if (!valid_vertiport(a) || !valid_vertiport(b) || a == b)
        throw InvalidInput("network: bad leg");
      if (!fly_time[a][b] || !energy[a][b] || *fly_time[a][b] <= 0.0 ||
          *energy[a][b] <= 0.0)
        throw InvalidInput("network: leg without positive fly time and energy");
    }
  }

  bool operator==(const Network&) const = default;
};

struct BatteryParams {
  double toc = 92.0;
  double boc = 0.0;
  double soc_min = 55.0;
  double rate_slow = 1.0;
  double rate_fast = 2.0;
  double price = 0.5;

  [[nodiscard]] double rate(bool slow) const { return slow ? rate_slow : rate_fast; }

  void check() const {
    if (!(boc <= soc_min && soc_min <= toc))
      throw InvalidInput("battery: need boc <= soc_min <= toc");
    if (!(0.0 < rate_slow && rate_slow < rate_fast))
      throw InvalidInput("battery: need 0 < rate_slow < rate_fast");
    if (price < 0.0) throw InvalidInput("battery: negative price");
  }

  bool operator==(const BatteryParams&) const = default;
};

struct Aircraft {
  int id = 0;
  int start_vertiport = 0;
  double start_minute = 420.0;

  bool operator==(const Aircraft&) const = default;
};

struct FlightRequest {
  int id = 0;
  int origin = 0;
  int destination = 0;
  double depart_minute = 0.0;
  double arrive_minute = 0.0;
  double value = 0.0;
  int passengers = 0;

  bool operator==(const FlightRequest&) const = default;
};

/// Charging on the ground between two consecutive services. `after` is spent
/// at the previous destination, `before` at the next origin.
struct ChargePlan {
  double duration_after = 0.0;
  double duration_before = 0.0;
  bool slow_after = true;
  bool slow_before = true;

  [[nodiscard]] bool idle() const { return duration_after <= 0.0 && duration_before <= 0.0; }
  bool operator==(const ChargePlan&) const = default;
};

struct Visit {
  int request = 0;
  ChargePlan plan;  // for the connection entering this request

  bool operator==(const Visit&) const = default;
};

/// routes[k] belongs to fleet[k]. Every request appears in exactly one route
/// or in `unserved`.
struct RoutingSolution {
  std::vector<std::vector<Visit>> routes;
  std::vector<int> unserved;

  bool operator==(const RoutingSolution&) const = default;

  [[nodiscard]] std::size_t served_count() const {
    std::size_t n = 0;
    for (const auto& r : routes) n += r.size();
    return n;
  }
};

struct SoCPoint {
  double e_depart = 0.0;
  double e_arrive = 0.0;
  double bought_after = 0.0;
  double bought_before = 0.0;
  bool deadhead = false;
  double e_deadhead_takeoff = 0.0;  // e at the deadhead takeoff, when any

  bool operator==(const SoCPoint&) const = default;
};

struct SoCTrace {
  std::vector<std::vector<SoCPoint>> routes;

  bool operator==(const SoCTrace&) const = default;
};

struct VnsParams {
  int stagnation_limit = 50;
  double beta_incr = 100.0;
  double beta_decr = 4.0;
  int update_period = 20;
  double time_budget_seconds = 1800.0;
  int validity_streak = 5;
  /// Iteration cap; 0 means unbounded. A finite cap with an ample time
  /// budget makes a run reproducible independently of machine speed.
  long max_iterations = 0;
};

struct RoutingConfig {
  double eta = 34.0;
  double delta = 10.0;
  double alpha_u = 1e7;
  double alpha_f = 1e4;
  VnsParams vns;
};

struct RoutingInstance {
  Network network;
  std::vector<Aircraft> fleet;
  std::vector<FlightRequest> requests;
  BatteryParams battery;
  RoutingConfig config;

  bool operator==(const RoutingInstance&) const = default;
};

inline bool operator==(const VnsParams& a, const VnsParams& b) {
  return a.stagnation_limit == b.stagnation_limit && a.beta_incr == b.beta_incr &&
         a.beta_decr == b.beta_decr && a.update_period == b.update_period &&
         a.time_budget_seconds == b.time_budget_seconds &&
         a.validity_streak == b.validity_streak && a.max_iterations == b.max_iterations;
}

inline bool operator==(const RoutingConfig& a, const RoutingConfig& b) {
  return a.eta == b.eta && a.delta == b.delta && a.alpha_u == b.alpha_u &&
         a.alpha_f == b.alpha_f && a.vns == b.vns;
}

/// Largest magnitude one connection can contribute to the monetary part of
/// the routing objective: a deadhead plus a service flight, two landings,
/// a full recharge on each side and the request value.
inline double connection_monetary_bound(const RoutingInstance& inst) {
  double max_fly = 0.0, max_fee = 0.0, max_value = 0.0;
  const auto& net = inst.network;
  for (std::size_t i = 0; i < net.size(); ++i) {
    max_fee = std::max(max_fee, net.vertiports[i].landing_fee);
    for (std::size_t j = 0; j < net.size(); ++j)
      if (net.fly_time[i][j]) max_fly = std::max(max_fly, *net.fly_time[i][j]);
  }
  for (const auto& r : inst.requests) max_value = std::max(max_value, std::abs(r.value));
  return inst.config.eta * 2.0 * max_fly + 2.0 * max_fee +
         2.0 * inst.battery.toc * inst.battery.price + max_value;
}

/// Structural checks plus the lexicographic weight ordering of the routing
/// objective (unserved >> fast charges >> money).
inline void check_instance(const RoutingInstance& inst) {
  inst.network.check();
  inst.battery.check();
  if (inst.fleet.empty()) throw InvalidInput("routing: empty fleet");
  for (const auto& a : inst.fleet)
    if (!inst.network.valid_vertiport(a.start_vertiport))
      throw InvalidInput("routing: aircraft starts at unknown vertiport");
  std::vector<int> ids;
  for (const auto& r : inst.requests) {
    if (r.id < 0) throw InvalidInput("routing: negative request id");
    if (!inst.network.has_leg(r.origin, r.destination))
      throw InvalidInput("routing: request " + std::to_string(r.id) +
                         " uses a leg outside the network");
    const double fly = *inst.network.fly(r.origin, r.destination);
    if (std::abs(r.arrive_minute - (r.depart_minute + fly)) > 1e-6)
      throw InvalidInput("routing: request " + std::to_string(r.id) +
                         " arrival inconsistent with fly time");
    ids.push_back(r.id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw InvalidInput("routing: duplicate request id");
  const auto& c = inst.config;
  if (!(c.vns.beta_decr > 1.0) || !(c.vns.beta_incr > 0.0))
    throw InvalidInput("routing: need beta_decr > 1 and beta_incr > 0");
  if (c.vns.update_period < 1 || c.vns.validity_streak < 1)
    throw InvalidInput("routing: bad penalty schedule");
  const double bound = connection_monetary_bound(inst);
  if (!(c.alpha_f > bound))
    throw InvalidInput("routing: alpha_f must exceed the per-connection monetary bound " +
                       std::to_string(bound));
  const double n = static_cast<double>(inst.requests.size());
  if (!(c.alpha_u > c.alpha_f * 2.0 * n + n * bound))
    throw InvalidInput("routing: alpha_u too small to dominate fast charges and money");
}

}  // namespace uam
