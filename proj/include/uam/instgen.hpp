#pragma once

// Seeded synthetic instances: commuter-style demands for pooling and
// fully connected vertiport networks with uniform request streams for
// routing.

#include <array>
#include <random>

#include "uam/core.hpp"
#include "uam/rng.hpp"

namespace uam {

struct DemandModel {
  std::vector<int> pax_values{1, 2, 3, 4};
  std::vector<double> pax_weights{0.70, 0.20, 0.05, 0.05};
  double morning_peak = 510.0;  // 8:30
  double evening_peak = 1020.0;  // 17:00
  double peak_sigma = 20.0;
  std::vector<double> mixture_weights{1.0 / 2.0, 1.0 / 3.0, 1.0 / 6.0};  // morning, evening, uniform
  double day_open = 420.0;
  double day_close = 1140.0;
  std::vector<double> offset_values{3.0, 5.0, 7.0};
  std::vector<double> offset_weights{0.40, 0.50, 0.10};
  double deadline_prob = 0.20;
  std::vector<double> deadline_slack{10.0, 15.0, 20.0};
  double premium_prob = 0.20;

  void check() const {
    auto sums_to_one = [](const std::vector<double>& w) {
      double s = 0.0;
      for (double x : w) {
        if (x < 0.0) return false;
        s += x;
      }
      return std::abs(s - 1.0) < 1e-9;
    };
    if (pax_values.size() != pax_weights.size() || !sums_to_one(pax_weights))
      throw InvalidInput("demand model: passenger weights");
    if (mixture_weights.size() != 3 || !sums_to_one(mixture_weights))
      throw InvalidInput("demand model: mixture weights");
    if (offset_values.size() != offset_weights.size() || !sums_to_one(offset_weights))
      throw InvalidInput("demand model: offset weights");
    if (deadline_prob < 0 || deadline_prob > 1 || premium_prob < 0 || premium_prob > 1)
      throw InvalidInput("demand model: probabilities must lie in [0, 1]");
    if (deadline_slack.empty()) throw InvalidInput("demand model: empty deadline slack set");
    if (!(day_open < day_close)) throw InvalidInput("demand model: empty service window");
  }
};

namespace detail {

template <typename T>
const T& pick_uniform(const std::vector<T>& v, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

inline std::size_t pick_weighted(const std::vector<double>& w, Rng& rng) {
  std::discrete_distribution<std::size_t> d(w.begin(), w.end());
  return d(rng);
}

}  // namespace detail

inline std::vector<Demand> gen_demands(int n, const DemandModel& model, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("gen_demands: n must be positive");
  model.check();
  Rng rng(seed);
  std::normal_distribution<double> morning(model.morning_peak, model.peak_sigma);
  std::normal_distribution<double> evening(model.evening_peak, model.peak_sigma);
  std::uniform_real_distribution<double> day(model.day_open, model.day_close);
  std::bernoulli_distribution has_deadline(model.deadline_prob), premium(model.premium_prob);

  std::vector<Demand> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Demand d;
    d.id = i;
    d.passengers = model.pax_values[detail::pick_weighted(model.pax_weights, rng)];
    double mean = 0.0;
    do {
      switch (detail::pick_weighted(model.mixture_weights, rng)) {
        case 0: mean = morning(rng); break;
        case 1: mean = evening(rng); break;
        default: mean = day(rng); break;
      }
    } while (mean < model.day_open || mean > model.day_close);
    d.arrival.mean_minute = mean;
    d.arrival.quantile_offset = model.offset_values[detail::pick_weighted(model.offset_weights, rng)];
    if (has_deadline(rng))
      d.latest_departure = d.arrival.quantile() + detail::pick_uniform(model.deadline_slack, rng);
    d.cls = premium(rng) ? DemandClass::Premium : DemandClass::Regular;
    out.push_back(d);
  }
  return out;
}

enum class Scenario { Low, Intermediate, High };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::Low: return "low";
    case Scenario::Intermediate: return "intermediate";
    case Scenario::High: return "high";
  }
  return "?";
}

inline Scenario parse_scenario(std::string_view s) {
  if (s == "low" || s == "l") return Scenario::Low;
  if (s == "intermediate" || s == "i") return Scenario::Intermediate;
  if (s == "high" || s == "h") return Scenario::High;
  throw InvalidInput("unknown scenario '" + std::string(s) + "'");
}

struct InfraModel {
  std::vector<double> landing_fees{30.0, 40.0, 80.0};
  std::vector<double> fly_times{10.0, 15.0, 20.0};
  double open = 420.0;
  double close = 1140.0;
  double energy_per_minute = 2.0;
  double value_per_passenger = 120.0;
  std::array<int, 3> requests_per_aircraft{5, 10, 15};
  std::optional<int> request_count;  // overrides rate x fleet when set
  DemandModel demand;  // passenger distribution of generated requests
  BatteryParams battery;
  RoutingConfig config;

  [[nodiscard]] int request_rate(Scenario s) const { return requests_per_aircraft[static_cast<int>(s)]; }
};

inline Network gen_network(int n_vertiports, const InfraModel& model, std::uint64_t seed) {
  if (n_vertiports < 2) throw InvalidInput("gen_network: at least 2 vertiports needed");
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(n_vertiports);
  Network net;
  for (int v = 0; v < n_vertiports; ++v)
    net.vertiports.push_back({v, detail::pick_uniform(model.landing_fees, rng), model.open, model.close});
  net.fly_time.assign(n, std::vector<std::optional<double>>(n));
  net.energy.assign(n, std::vector<std::optional<double>>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double t = detail::pick_uniform(model.fly_times, rng);
      net.fly_time[i][j] = net.fly_time[j][i] = t;
      net.energy[i][j] = net.energy[j][i] = model.energy_per_minute * t;
    }
  for (int i = 0; i < n_vertiports; ++i)
    for (int j = 0; j < n_vertiports; ++j)
      if (i != j) net.legs.emplace_back(i, j);
  net.check();
  return net;
}

/// Requests uniform over legs, integer departures uniform over the part of
/// the day that lets the flight land before closing.
inline RoutingInstance gen_routing_instance(int n_aircraft, int n_vertiports, Scenario scenario,
                                            std::uint64_t seed, const InfraModel& model = {}) {
  if (n_aircraft < 1) throw InvalidInput("gen_routing_instance: at least one aircraft");
  RoutingInstance inst;
  inst.network = gen_network(n_vertiports, model, stream_seed(seed, "network"));
  inst.battery = model.battery;
  inst.config = model.config;
  Rng rng = make_stream(seed, "requests");
  std::uniform_int_distribution<int> start(0, n_vertiports - 1);
  for (int a = 0; a < n_aircraft; ++a) inst.fleet.push_back({a, start(rng), model.open});
  const int count = model.request_count.value_or(model.request_rate(scenario) * n_aircraft);
  for (int k = 0; k < count; ++k) {
    const auto& [o, d] = detail::pick_uniform(inst.network.legs, rng);
    const double fly = *inst.network.fly(o, d);
    std::uniform_int_distribution<int> dep(static_cast<int>(model.open),
                                           static_cast<int>(model.close - fly));
    FlightRequest r;
    r.id = k;
    r.origin = o;
    r.destination = d;
    r.depart_minute = dep(rng);
    r.arrive_minute = r.depart_minute + fly;
    r.passengers = model.demand.pax_values[detail::pick_weighted(model.demand.pax_weights, rng)];
    r.value = model.value_per_passenger * r.passengers;
    inst.requests.push_back(r);
  }
  check_instance(inst);
  return inst;
}

}  // namespace uam
