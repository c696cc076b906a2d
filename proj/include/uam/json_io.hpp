#pragma once

// JSON documents for every artifact. Each top-level document carries
// "schema_version" and "kind"; readers refuse anything else.

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "uam/core.hpp"
#include "uam/pooling.hpp"

namespace uam {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

/// A demand with the vertiport pair it books.
struct Booking {
  Demand demand;
  int origin = 0;
  int destination = 1;

  bool operator==(const Booking&) const = default;
};

inline void to_json(Json& j, const Demand& d) {
  j = Json{{"id", d.id},
           {"passengers", d.passengers},
           {"mean_minute", d.arrival.mean_minute},
           {"quantile_offset", d.arrival.quantile_offset},
           {"latest_departure", d.latest_departure ? Json(*d.latest_departure) : Json(nullptr)},
           {"class", to_string(d.cls)}};
}

inline void from_json(const Json& j, Demand& d) {
  d.id = j.at("id").get<int>();
  d.passengers = j.at("passengers").get<int>();
  d.arrival.mean_minute = j.at("mean_minute").get<double>();
  d.arrival.quantile_offset = j.at("quantile_offset").get<double>();
  d.latest_departure.reset();
  if (j.contains("latest_departure") && !j["latest_departure"].is_null())
    d.latest_departure = j["latest_departure"].get<double>();
  const auto cls = j.value("class", std::string("regular"));
  if (cls == "regular")
    d.cls = DemandClass::Regular;
  else if (cls == "premium")
    d.cls = DemandClass::Premium;
  else
    throw InvalidInput("unknown demand class '" + cls + "'");
}

inline void to_json(Json& j, const Booking& b) {
  to_json(j, b.demand);
  j["origin"] = b.origin;
  j["destination"] = b.destination;
}

inline void from_json(const Json& j, Booking& b) {
  from_json(j, b.demand);
  b.origin = j.value("origin", 0);
  b.destination = j.value("destination", 1);
}

inline void to_json(Json& j, const PoolingConfig& c) {
  j = Json{{"capacity", c.capacity},         {"t_regular", c.t_regular},
           {"t_premium", c.t_premium},       {"alpha_regular", c.alpha_regular},
           {"alpha_premium", c.alpha_premium}, {"lambda_p", c.lambda_p},
           {"beam_width", c.beam_width}};
}

inline void from_json(const Json& j, PoolingConfig& c) {
  const PoolingConfig d;
  c.capacity = j.value("capacity", d.capacity);
  c.t_regular = j.value("t_regular", d.t_regular);
  c.t_premium = j.value("t_premium", d.t_premium);
  c.alpha_regular = j.value("alpha_regular", d.alpha_regular);
  c.alpha_premium = j.value("alpha_premium", d.alpha_premium);
  c.lambda_p = j.value("lambda_p", d.lambda_p);
  c.beam_width = j.value("beam_width", d.beam_width);
}

inline void to_json(Json& j, const PoolingSolution& s) {
  j = Json{{"groups", s.groups}, {"departures", s.departures}};
}

inline void from_json(const Json& j, PoolingSolution& s) {
  s.groups = j.at("groups").get<std::vector<std::vector<int>>>();
  s.departures = j.at("departures").get<std::vector<double>>();
}

inline void to_json(Json& j, const Network& n) {
  Json vs = Json::array();
  for (const auto& v : n.vertiports)
    vs.push_back({{"id", v.id}, {"landing_fee", v.landing_fee}, {"open", v.open_minute}, {"close", v.close_minute}});
  // Every defined arc; "bookable" marks the legs requests may use.
  Json arcs = Json::array();
  for (std::size_t a = 0; a < n.size(); ++a)
    for (std::size_t b = 0; b < n.size(); ++b)
      if (n.fly_time[a][b])
        arcs.push_back({{"from", a},
                        {"to", b},
                        {"fly_time", *n.fly_time[a][b]},
                        {"energy", n.energy[a][b].value_or(0.0)},
                        {"bookable", n.has_leg(static_cast<int>(a), static_cast<int>(b))}});
  j = Json{{"vertiports", vs}, {"arcs", arcs}};
}

inline void from_json(const Json& j, Network& n) {
  n = Network{};
  for (const auto& v : j.at("vertiports"))
    n.vertiports.push_back({v.at("id").get<int>(), v.at("landing_fee").get<double>(), v.value("open", 420.0),
                            v.value("close", 1140.0)});
  const auto size = n.vertiports.size();
  n.fly_time.assign(size, std::vector<std::optional<double>>(size));
  n.energy.assign(size, std::vector<std::optional<double>>(size));
  for (const auto& l : j.at("arcs")) {
    const int a = l.at("from").get<int>(), b = l.at("to").get<int>();
    if (!n.valid_vertiport(a) || !n.valid_vertiport(b)) throw InvalidInput("arc with unknown vertiport");
    n.fly_time[a][b] = l.at("fly_time").get<double>();
    n.energy[a][b] = l.at("energy").get<double>();
    if (l.value("bookable", true)) n.legs.emplace_back(a, b);
  }
  n.check();
}

inline void to_json(Json& j, const FlightRequest& r) {
  j = Json{{"id", r.id},
           {"origin", r.origin},
           {"destination", r.destination},
           {"depart_minute", r.depart_minute},
           {"arrive_minute", r.arrive_minute},
           {"value", r.value},
           {"passengers", r.passengers}};
}

inline void from_json(const Json& j, FlightRequest& r) {
  r.id = j.at("id").get<int>();
  r.origin = j.at("origin").get<int>();
  r.destination = j.at("destination").get<int>();
  r.depart_minute = j.at("depart_minute").get<double>();
  r.arrive_minute = j.at("arrive_minute").get<double>();
  r.value = j.at("value").get<double>();
  r.passengers = j.value("passengers", 0);
}

inline void to_json(Json& j, const BatteryParams& b) {
  j = Json{{"toc", b.toc},           {"boc", b.boc},           {"soc_min", b.soc_min},
           {"rate_slow", b.rate_slow}, {"rate_fast", b.rate_fast}, {"price", b.price}};
}

inline void from_json(const Json& j, BatteryParams& b) {
  const BatteryParams d;
  b.toc = j.value("toc", d.toc);
  b.boc = j.value("boc", d.boc);
  b.soc_min = j.value("soc_min", d.soc_min);
  b.rate_slow = j.value("rate_slow", d.rate_slow);
  b.rate_fast = j.value("rate_fast", d.rate_fast);
  b.price = j.value("price", d.price);
}

inline void to_json(Json& j, const VnsParams& p) {
  j = Json{{"stagnation_limit", p.stagnation_limit}, {"beta_incr", p.beta_incr},
           {"beta_decr", p.beta_decr},               {"update_period", p.update_period},
           {"time_budget_seconds", p.time_budget_seconds}, {"validity_streak", p.validity_streak},
           {"max_iterations", p.max_iterations}};
}

inline void from_json(const Json& j, VnsParams& p) {
  const VnsParams d;
  p.stagnation_limit = j.value("stagnation_limit", d.stagnation_limit);
  p.beta_incr = j.value("beta_incr", d.beta_incr);
  p.beta_decr = j.value("beta_decr", d.beta_decr);
  p.update_period = j.value("update_period", d.update_period);
  p.time_budget_seconds = j.value("time_budget_seconds", d.time_budget_seconds);
  p.validity_streak = j.value("validity_streak", d.validity_streak);
  p.max_iterations = j.value("max_iterations", d.max_iterations);
}

inline void to_json(Json& j, const RoutingConfig& c) {
  j = Json{{"eta", c.eta}, {"delta", c.delta}, {"alpha_u", c.alpha_u}, {"alpha_f", c.alpha_f}, {"vns", c.vns}};
}

inline void from_json(const Json& j, RoutingConfig& c) {
  const RoutingConfig d;
  c.eta = j.value("eta", d.eta);
  c.delta = j.value("delta", d.delta);
  c.alpha_u = j.value("alpha_u", d.alpha_u);
  c.alpha_f = j.value("alpha_f", d.alpha_f);
  c.vns = j.contains("vns") ? j["vns"].get<VnsParams>() : d.vns;
}

inline void to_json(Json& j, const RoutingInstance& inst) {
  Json fleet = Json::array();
  for (const auto& a : inst.fleet)
    fleet.push_back({{"id", a.id}, {"start_vertiport", a.start_vertiport}, {"start_minute", a.start_minute}});
  j = Json{{"network", inst.network}, {"fleet", fleet},          {"requests", inst.requests},
           {"battery", inst.battery}, {"config", inst.config}};
}

inline void from_json(const Json& j, RoutingInstance& inst) {
  inst = RoutingInstance{};
  inst.network = j.at("network").get<Network>();
  for (const auto& a : j.at("fleet"))
    inst.fleet.push_back({a.at("id").get<int>(), a.at("start_vertiport").get<int>(), a.value("start_minute", 420.0)});
  inst.requests = j.at("requests").get<std::vector<FlightRequest>>();
  if (j.contains("battery")) inst.battery = j["battery"].get<BatteryParams>();
  if (j.contains("config")) inst.config = j["config"].get<RoutingConfig>();
}

inline void to_json(Json& j, const Visit& v) {
  j = Json{{"request", v.request},
           {"charge_after", v.plan.duration_after},
           {"charge_before", v.plan.duration_before},
           {"slow_after", v.plan.slow_after},
           {"slow_before", v.plan.slow_before}};
}

inline void from_json(const Json& j, Visit& v) {
  v.request = j.at("request").get<int>();
  v.plan.duration_after = j.value("charge_after", 0.0);
  v.plan.duration_before = j.value("charge_before", 0.0);
  v.plan.slow_after = j.value("slow_after", true);
  v.plan.slow_before = j.value("slow_before", true);
}

inline void to_json(Json& j, const RoutingSolution& s) {
  j = Json{{"routes", s.routes}, {"unserved", s.unserved}};
}

inline void from_json(const Json& j, RoutingSolution& s) {
  s.routes = j.at("routes").get<std::vector<std::vector<Visit>>>();
  s.unserved = j.at("unserved").get<std::vector<int>>();
}

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

inline Json document(std::string_view kind, Json body) {
  Json doc = Json::object();
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = kind;
  for (auto& [k, v] : body.items()) doc[k] = std::move(v);
  return doc;
}

/// Checks version and kind, translating library errors into InvalidInput.
template <typename T>
T read_document(const Json& doc, std::string_view kind, std::string_view field) {
  try {
    if (!doc.is_object() || !doc.contains("schema_version"))
      throw InvalidInput("document without schema_version");
    if (doc.at("schema_version").get<int>() != kSchemaVersion)
      throw InvalidInput("unsupported schema_version " + doc.at("schema_version").dump());
    if (doc.value("kind", std::string()) != kind)
      throw InvalidInput("expected a '" + std::string(kind) + "' document, got '" +
                         doc.value("kind", std::string("?")) + "'");
    return doc.at(std::string(field)).get<T>();
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("schema mismatch: ") + e.what());
  }
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

inline void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace uam
