#pragma once

#include "uam/core.hpp"

namespace uam::testing {

inline Demand make_demand(int id, double mean, double offset, DemandClass cls = DemandClass::Regular,
                          int pax = 1, std::optional<double> latest = std::nullopt) {
  Demand d;
  d.id = id;
  d.passengers = pax;
  d.arrival = {mean, offset};
  d.latest_departure = latest;
  d.cls = cls;
  return d;
}

/// Fully connected network with the same fly time on every pair and energy
/// twice the fly time.
inline Network uniform_network(int n, double fly, std::vector<double> fees) {
  Network net;
  for (int v = 0; v < n; ++v) net.vertiports.push_back({v, fees.at(v), 420.0, 1140.0});
  net.fly_time.assign(n, std::vector<std::optional<double>>(n));
  net.energy.assign(n, std::vector<std::optional<double>>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) {
        net.fly_time[i][j] = fly;
        net.energy[i][j] = 2.0 * fly;
        net.legs.emplace_back(i, j);
      }
  return net;
}

inline FlightRequest make_request(int id, int origin, int destination, double depart, double fly,
                                  double value = 0.0, int pax = 1) {
  return {id, origin, destination, depart, depart + fly, value, pax};
}

}  // namespace uam::testing
