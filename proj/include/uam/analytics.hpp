#pragma once

// Solution metrics and experiment drivers (performance grids, class QoS,
// group-composition fairness, parameter sweeps), plus a small worker pool.

#include <atomic>
#include <boost/math/distributions/students_t.hpp>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "uam/instgen.hpp"
#include "uam/pooling.hpp"
#include "uam/routing_model.hpp"
#include "uam/vns.hpp"

namespace uam {

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

/// Running count / mean / population standard deviation.
struct Stat {
  long count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }
  [[nodiscard]] double stddev() const { return count > 0 ? std::sqrt(m2 / static_cast<double>(count)) : 0.0; }
  [[nodiscard]] bool empty() const { return count == 0; }
};

inline std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = rank;
    i = j + 1;
  }
  return r;
}

struct Correlation {
  double rho = 0.0;
  double p_value = 1.0;  // two-sided
  std::size_t n = 0;
};

/// Spearman rank correlation with the t-approximation p-value.
inline Correlation spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("spearman: length mismatch");
  Correlation c;
  c.n = x.size();
  if (c.n < 3) return c;
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / c.n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / c.n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < c.n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return c;
  c.rho = sxy / std::sqrt(sxx * syy);
  const double df = static_cast<double>(c.n) - 2.0;
  if (std::abs(c.rho) >= 1.0) {
    c.p_value = 0.0;
    return c;
  }
  const double t = c.rho * std::sqrt(df / (1.0 - c.rho * c.rho));
  const boost::math::students_t dist(df);
  c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return c;
}

/// Runs fn(0..n-1) on up to `jobs` threads. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::clamp<long>(jobs, 1, static_cast<long>(std::max<std::size_t>(n, 1))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Pooling metrics
// ---------------------------------------------------------------------------

struct TimeWindow {
  double from = 0.0;
  double to = 0.0;
  [[nodiscard]] bool contains(double t) const { return t >= from && t <= to; }
};

/// 7:30-9:30 and 16:00-18:00.
inline std::vector<TimeWindow> default_peak_windows() { return {{450.0, 570.0}, {960.0, 1080.0}}; }

struct PoolingMetrics {
  int n_requests = 0;
  double requests_load = 0.0;    // demands per group
  double passengers_load = 0.0;  // passengers per group
  Stat wt_premium, wt_regular;
  Stat wt_peak_premium, wt_peak_regular, wt_offpeak_premium, wt_offpeak_regular;
};

inline PoolingMetrics pooling_metrics(const PoolingSolution& sol, std::span<const Demand> demands,
                                      std::span<const TimeWindow> peaks) {
  DemandIndex index(demands);
  PoolingMetrics m;
  m.n_requests = static_cast<int>(sol.groups.size());
  int members = 0, pax = 0;
  for (std::size_t k = 0; k < sol.groups.size(); ++k) {
    for (int id : sol.groups[k]) {
      const Demand& d = index.at(id);
      ++members;
      pax += d.passengers;
      const double wait = sol.departures[k] - d.arrival.mean_minute;
      const bool premium = d.cls == DemandClass::Premium;
      const bool peak = std::any_of(peaks.begin(), peaks.end(),
                                    [&](const TimeWindow& w) { return w.contains(d.arrival.mean_minute); });
      (premium ? m.wt_premium : m.wt_regular).add(wait);
      if (peak)
        (premium ? m.wt_peak_premium : m.wt_peak_regular).add(wait);
      else
        (premium ? m.wt_offpeak_premium : m.wt_offpeak_regular).add(wait);
    }
  }
  if (m.n_requests > 0) {
    m.requests_load = static_cast<double>(members) / m.n_requests;
    m.passengers_load = static_cast<double>(pax) / m.n_requests;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Routing metrics
// ---------------------------------------------------------------------------

struct RoutingMetrics {
  int served = 0;
  int total = 0;
  double pct_service = 0.0;
  int n_charge = 0;
  int n_fast = 0;
  double pct_fast = 0.0;
  std::optional<double> cps;  // cost per served request, request values added back
};

inline RoutingMetrics routing_metrics(const RoutingSolution& sol, const RoutingModel& model) {
  check_coherent(model, sol);
  const auto& inst = model.instance();
  RoutingMetrics m;
  m.total = static_cast<int>(inst.requests.size());
  m.served = static_cast<int>(sol.served_count());
  m.pct_service = m.total > 0 ? 100.0 * m.served / m.total : 100.0;
  double cost = 0.0;
  for (std::size_t a = 0; a < sol.routes.size(); ++a) {
    const auto ev = model.simulate(a, sol.routes[a]);
    m.n_charge += ev.n_charges;
    m.n_fast += ev.n_fast;
    cost += ev.connection_cost + ev.bought * inst.battery.price;
    for (const auto& v : sol.routes[a]) cost += model.request(v.request).value;
  }
  m.pct_fast = m.n_charge > 0 ? 100.0 * m.n_fast / m.n_charge : 0.0;
  if (m.served > 0) m.cps = cost / m.served;
  return m;
}

// ---------------------------------------------------------------------------
// Fairness
// ---------------------------------------------------------------------------

enum class Category { RegularPure, RegularMixed, PremiumPure, PremiumMixed };
inline constexpr std::array<Category, 4> kCategories{Category::RegularPure, Category::RegularMixed,
                                                     Category::PremiumPure, Category::PremiumMixed};

inline const char* to_string(Category c) {
  switch (c) {
    case Category::RegularPure: return "regular-pure";
    case Category::RegularMixed: return "regular-mixed";
    case Category::PremiumPure: return "premium-pure";
    case Category::PremiumMixed: return "premium-mixed";
  }
  return "?";
}

struct FairnessRecord {
  int demand = 0;
  DemandClass cls = DemandClass::Regular;
  bool mixed = false;
  double wait = 0.0;
  bool is_last_arrival = false;

  [[nodiscard]] Category category() const {
    if (cls == DemandClass::Regular) return mixed ? Category::RegularMixed : Category::RegularPure;
    return mixed ? Category::PremiumMixed : Category::PremiumPure;
  }
};

/// One record per member of every group with at least two demands.
inline std::vector<FairnessRecord> fairness_records(const PoolingSolution& sol, std::span<const Demand> demands) {
  DemandIndex index(demands);
  std::vector<FairnessRecord> out;
  for (std::size_t k = 0; k < sol.groups.size(); ++k) {
    const auto& g = sol.groups[k];
    if (g.size() < 2) continue;
    bool has_regular = false, has_premium = false;
    double max_q = -std::numeric_limits<double>::infinity();
    for (int id : g) {
      const Demand& d = index.at(id);
      (d.cls == DemandClass::Premium ? has_premium : has_regular) = true;
      max_q = std::max(max_q, d.arrival.quantile());
    }
    for (int id : g) {
      const Demand& d = index.at(id);
      out.push_back({id, d.cls, has_regular && has_premium, sol.departures[k] - d.arrival.mean_minute,
                     d.arrival.quantile() >= max_q - kTimeEps});
    }
  }
  return out;
}

/// Per-category waits and last-arrival frequencies of one solved instance.
struct FairnessSample {
  std::array<Stat, 4> wait;
  std::array<Stat, 4> last_arrival;  // mean of the 0/1 indicator

  void add(const FairnessRecord& r) {
    const auto c = static_cast<std::size_t>(r.category());
    wait[c].add(r.wait);
    last_arrival[c].add(r.is_last_arrival ? 1.0 : 0.0);
  }
};

struct FairnessCell {
  double alpha_regular = 0.0;
  double premium_share = 0.0;
  int repetition = 0;
  FairnessSample sample;
};

struct FairnessParams {
  std::vector<double> alpha_regular{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> premium_shares{0.2, 0.5, 0.8};
  int repetitions = 20;
  int demands = 100;
  PoolingConfig pooling;
  DemandModel model;
};

/// Every (alpha_regular, premium share, repetition) cell. Repetition r uses
/// the same demand stream for every alpha so that trends along alpha are
/// paired.
inline std::vector<FairnessCell> fairness_experiment(const FairnessParams& p, std::uint64_t seed, int jobs = 1) {
  std::vector<FairnessCell> cells;
  for (double share : p.premium_shares)
    for (double a : p.alpha_regular)
      for (int r = 0; r < p.repetitions; ++r) cells.push_back({a, share, r, {}});
  parallel_for(cells.size(), jobs, [&](std::size_t i) {
    auto& cell = cells[i];
    DemandModel model = p.model;
    model.premium_prob = cell.premium_share;
    const auto share_key = static_cast<std::uint64_t>(std::llround(cell.premium_share * 1000.0));
    const auto demands = gen_demands(p.demands, model, stream_seed(seed, "fairness", share_key * 100003ULL + cell.repetition));
    PoolingConfig cfg = p.pooling;
    cfg.alpha_regular = cell.alpha_regular;
    const auto res = beam_search(demands, cfg);
    for (const auto& rec : fairness_records(res.solution, demands)) cell.sample.add(rec);
  });
  return cells;
}

struct QosSweepParams {
  std::vector<double> t_premium{15.0, 17.5, 20.0, 22.5, 25.0};
  std::vector<double> alpha_regular{0.0, 0.25, 0.5, 0.75, 1.0};
  int repetitions = 20;
  int demands = 100;
  double premium_share = 0.5;
  PoolingConfig pooling{.t_regular = 25.0, .alpha_premium = 1.0};
  DemandModel model;
};

struct QosSweep {
  std::vector<double> t_premium, alpha_regular;
  std::vector<std::vector<double>> regular_mean, premium_mean;  // [t_premium][alpha]
};

inline QosSweep sweep_qos(const QosSweepParams& p, std::uint64_t seed, int jobs = 1) {
  const std::size_t nt = p.t_premium.size(), na = p.alpha_regular.size();
  const auto reps = static_cast<std::size_t>(p.repetitions);
  std::vector<PoolingMetrics> runs(nt * na * reps);
  parallel_for(runs.size(), jobs, [&](std::size_t i) {
    const std::size_t r = i % reps, a = (i / reps) % na, t = i / (reps * na);
    DemandModel model = p.model;
    model.premium_prob = p.premium_share;
    const auto demands = gen_demands(p.demands, model, stream_seed(seed, "sweep", r));
    PoolingConfig cfg = p.pooling;
    cfg.t_premium = p.t_premium[t];
    cfg.alpha_regular = p.alpha_regular[a];
    // Demands beyond the tighter premium limit cannot fly at all.
    std::vector<Demand> kept;
    for (const auto& d : demands)
      if (d.arrival.quantile_offset <= cfg.max_wait(d.cls)) kept.push_back(d);
    const auto res = beam_search(kept, cfg);
    runs[i] = pooling_metrics(res.solution, kept, default_peak_windows());
  });
  QosSweep out{p.t_premium, p.alpha_regular, {}, {}};
  out.regular_mean.assign(nt, std::vector<double>(na, 0.0));
  out.premium_mean.assign(nt, std::vector<double>(na, 0.0));
  for (std::size_t t = 0; t < nt; ++t)
    for (std::size_t a = 0; a < na; ++a) {
      Stat reg, pre;
      for (std::size_t r = 0; r < reps; ++r) {
        const auto& m = runs[(t * na + a) * reps + r];
        if (!m.wt_regular.empty()) reg.add(m.wt_regular.mean);
        if (!m.wt_premium.empty()) pre.add(m.wt_premium.mean);
      }
      out.regular_mean[t][a] = reg.mean;
      out.premium_mean[t][a] = pre.mean;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Performance grids
// ---------------------------------------------------------------------------

struct PoolingBenchRow {
  int demands = 0;
  int repetition = 0;
  double objective = 0.0;
  PoolingMetrics metrics;
  double seconds = 0.0;
};

inline std::vector<PoolingBenchRow> bench_pooling(std::span<const int> sizes, int repetitions,
                                                  const PoolingConfig& cfg, const DemandModel& model,
                                                  std::uint64_t seed, int jobs = 1) {
  std::vector<PoolingBenchRow> rows;
  for (int d : sizes)
    for (int r = 0; r < repetitions; ++r) {
      PoolingBenchRow row;
      row.demands = d;
      row.repetition = r;
      rows.push_back(row);
    }
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    auto& row = rows[i];
    const auto demands = gen_demands(row.demands, model, stream_seed(seed, "bench-pooling",
                                                                     static_cast<std::uint64_t>(row.demands) * 100003ULL + row.repetition));
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = beam_search(demands, cfg);
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.objective = res.objective;
    row.metrics = pooling_metrics(res.solution, demands, default_peak_windows());
  });
  return rows;
}

struct RoutingScenario {
  int aircraft = 3;
  int vertiports = 3;
  Scenario scenario = Scenario::Low;
};

struct RoutingBenchRow {
  RoutingScenario scenario;
  int requests = 0;
  int repetition = 0;
  RoutingMetrics metrics;
  SearchObjective objective;
  long iterations = 0;
  double seconds = 0.0;
};

/// One instance per scenario (instance seed fixed by the scenario), one VNS
/// run per repetition.
inline std::vector<RoutingBenchRow> bench_routing(std::span<const RoutingScenario> scenarios, int repetitions,
                                                  double budget_seconds, std::uint64_t seed, int jobs = 1,
                                                  const InfraModel& infra = {}) {
  std::vector<RoutingBenchRow> rows;
  for (const auto& s : scenarios)
    for (int r = 0; r < repetitions; ++r) {
      RoutingBenchRow row;
      row.scenario = s;
      row.repetition = r;
      rows.push_back(row);
    }
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    auto& row = rows[i];
    const auto& s = row.scenario;
    const auto key = static_cast<std::uint64_t>(s.aircraft * 10000 + s.vertiports * 10 + static_cast<int>(s.scenario));
    const auto inst = gen_routing_instance(s.aircraft, s.vertiports, s.scenario, stream_seed(seed, "bench-instance", key), infra);
    const RoutingModel model(inst);
    Rng rng = make_stream(seed, "bench-vns", key * 1000ULL + row.repetition);
    VnsOptions opts;
    opts.time_budget_seconds = budget_seconds;
    const auto res = uam_vns(model, initial_solution(model, rng), rng, opts);
    row.requests = static_cast<int>(inst.requests.size());
    row.metrics = routing_metrics(res.best, model);
    row.objective = res.objective;
    row.iterations = res.iterations;
    row.seconds = res.elapsed_seconds;
  });
  return rows;
}

}  // namespace uam
