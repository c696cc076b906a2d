// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any fail.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "uam/analytics.hpp"
#include "uam/instgen.hpp"
#include "uam/online.hpp"
#include "uam/oracles.hpp"
#include "uam/pooling.hpp"
#include "uam/validate.hpp"
#include "uam/vns.hpp"

using namespace uam;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome pooling_oracle() {
  const auto t0 = clock_type::now();
  int equal = 0;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const int n = 6 + k % 7;
    const auto ds = gen_demands(n, {}, stream_seed(101, "c1", k));
    PoolingConfig cfg;
    cfg.beam_width = 1000;
    const auto beam = beam_search(ds, cfg);
    const auto exact = exact_pooling(ds, cfg);
    const double gap = std::abs(beam.objective - exact.objective);
    worst = std::max(worst, gap);
    if (gap <= 1e-6) ++equal;
  }
  const double t = seconds_since(t0);
  return {equal == 50 && t < 10.0, fmt("%d/50 equal, max gap %.3g, %.2f s (limit 10 s)", equal, worst, t)};
}

Outcome class_qos() {
  const auto t0 = clock_type::now();
  int ok = 0;
  Stat wp, wr;
  for (int k = 0; k < 20; ++k) {
    const auto ds = gen_demands(50, {}, stream_seed(102, "c2", k));
    const auto res = beam_search(ds, PoolingConfig{});
    const auto m = pooling_metrics(res.solution, ds, default_peak_windows());
    wp.add(m.wt_premium.mean);
    wr.add(m.wt_regular.mean);
    if (m.wt_premium.mean < m.wt_regular.mean && m.wt_premium.stddev() < m.wt_regular.stddev()) ++ok;
  }
  const double t = seconds_since(t0);
  return {ok >= 18 && t < 30.0,
          fmt("%d/20 ordered (need 18), mean WT premium %.2f vs regular %.2f min, %.2f s", ok, wp.mean, wr.mean, t)};
}

Outcome scale_trend() {
  const auto t0 = clock_type::now();
  Stat pax20, pax50, dem20, dem50;
  for (int k = 0; k < 20; ++k)
    for (int n : {20, 50}) {
      const auto ds = gen_demands(n, {}, stream_seed(103, "c3", k * 100 + n));
      const auto m = pooling_metrics(beam_search(ds, PoolingConfig{}).solution, ds, default_peak_windows());
      (n == 20 ? pax20 : pax50).add(m.passengers_load);
      (n == 20 ? dem20 : dem50).add(m.requests_load);
    }
  const double t = seconds_since(t0);
  const bool pass = pax50.mean >= 2.6 && pax50.mean <= 3.6 && pax50.mean > pax20.mean && t < 60.0;
  return {pass, fmt("passengers/request D=20 %.3f -> D=50 %.3f (demands/request %.3f -> %.3f), %.2f s", pax20.mean,
                    pax50.mean, dem20.mean, dem50.mean, t)};
}

Outcome beam_speed() {
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const auto ds = gen_demands(50, {}, stream_seed(104, "c4", k));
    PoolingConfig cfg;
    cfg.beam_width = 1000;
    const auto t0 = clock_type::now();
    beam_search(ds, cfg);
    worst = std::max(worst, seconds_since(t0));
  }
  return {worst < 1.0, fmt("slowest of 10 instances %.3f s (limit 1 s)", worst)};
}

// Seeds 0 and 2 are the first (3, 3, 15) instances whose timing admits full
// service; seed 0 additionally needs a fast charge, seed 2 is servable on slow
// charging alone.
constexpr std::uint64_t kLowDemandSeed = 2;

Outcome low_demand_service() {
  const auto t0 = clock_type::now();
  const auto inst = gen_routing_instance(3, 3, Scenario::Low, kLowDemandSeed);
  const RoutingModel m(inst);
  std::vector<VnsResult> runs(20);
  parallel_for(runs.size(), jobs(), [&](std::size_t r) {
    Rng rng = make_stream(105, "c5", r);
    VnsOptions opts;
    opts.time_budget_seconds = 60.0;
    runs[r] = uam_vns(m, initial_solution(m, rng), rng, opts);
  });
  int full = 0, no_fast = 0, valid = 0;
  double longest = 0.0;
  for (const auto& r : runs) {
    full += r.objective.n_unserved == 0;
    no_fast += r.objective.n_fast == 0;
    valid += validate_routing(r.best, m).empty();
    longest = std::max(longest, r.elapsed_seconds);
  }
  const double t = seconds_since(t0);
  return {full == 20 && no_fast == 20 && valid == 20 && t < 1500.0,
          fmt("instance seed %llu: full service %d/20, zero fast %d/20, valid %d/20, longest run %.1f s, %.1f s total",
              static_cast<unsigned long long>(kLowDemandSeed), full, no_fast, valid, longest, t)};
}

Outcome routing_oracle() {
  const auto t0 = clock_type::now();
  InfraModel im;
  im.request_count = 5;
  int nu = 0, tuple = 0;
  for (int k = 0; k < 20; ++k) {
    const auto inst = gen_routing_instance(2, 3, Scenario::Low, stream_seed(106, "c6", k), im);
    const RoutingModel m(inst);
    const auto exact = exact_routing(inst);
    Rng rng = make_stream(106, "c6-vns", k);
    VnsOptions opts;
    opts.time_budget_seconds = 5.0;
    const auto h = uam_vns(m, initial_solution(m, rng), rng, opts);
    if (h.objective.n_unserved == exact.objective.n_unserved) ++nu;
    if (h.objective.n_unserved == exact.objective.n_unserved && h.objective.n_fast == exact.objective.n_fast &&
        std::abs(h.objective.monetary - exact.objective.monetary) <= 1e-6)
      ++tuple;
  }
  const double t = seconds_since(t0);
  return {nu >= 18 && tuple >= 15 && t < 300.0,
          fmt("n_u matches %d/20 (need 18), full tuple %d/20 (need 15), %.1f s", nu, tuple, t)};
}

Outcome validators() {
  const auto t0 = clock_type::now();
  long moves = 0, incoherent = 0, soc_errors = 0, tie_errors = 0, emitted = 0, rejected = 0;
  auto check_soc = [&](const RoutingModel& m, const RoutingSolution& s, bool valid) {
    const auto& bat = m.instance().battery;
    for (std::size_t a = 0; a < s.routes.size(); ++a) {
      const auto trace = simulate_soc(m, a, s.routes[a]);
      double e = bat.toc;
      for (std::size_t k = 0; k < trace.size(); ++k) {
        const auto& p = trace[k];
        const Connection& c = m.entering(a, s.routes[a], k);
        const bool ok = std::abs(p.e_depart - (e + p.bought_after - c.deadhead_energy + p.bought_before)) <= 1e-9 &&
                        std::abs(p.e_arrive - p.e_depart + c.service_energy) <= 1e-9 &&
                        p.e_depart <= bat.toc + 1e-9 && (!valid || p.e_arrive >= bat.boc - 1e-9);
        if (!ok) ++soc_errors;
        e = p.e_arrive;
      }
    }
  };
  for (std::uint64_t seed = 0; moves < 10'000; ++seed) {
    const auto inst = gen_routing_instance(3, 3, Scenario::Intermediate, stream_seed(107, "c7", seed));
    const RoutingModel m(inst);
    Rng rng = make_stream(107, "c7-moves", seed);
    auto sol = initial_solution(m, rng);
    std::uniform_int_distribution<int> pick_n(1, 4);
    std::uniform_real_distribution<double> pick_lambda(0.0, 1000.0);
    for (int step = 0; step < 2500; ++step) {
      const auto n = static_cast<Neighborhood>(pick_n(rng));
      const auto options = moves_of(n, m, sol, pick_lambda(rng));
      if (options.empty()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
      sol = apply_move(m, sol, options[pick(rng)]);
      ++moves;
      try {
        check_coherent(m, sol);
      } catch (const std::exception&) {
        ++incoherent;
        continue;
      }
      if (n == Neighborhood::Recharge)
        for (std::size_t a = 0; a < sol.routes.size(); ++a)
          for (std::size_t k = 0; k < sol.routes[a].size(); ++k)
            if (!m.entering(a, sol.routes[a], k).deadhead &&
                sol.routes[a][k].plan.slow_after != sol.routes[a][k].plan.slow_before)
              ++tie_errors;
      check_soc(m, sol, false);
    }
    VnsOptions opts;
    opts.max_iterations = 30;
    const auto res = uam_vns(m, initial_solution(m, rng), rng, opts);
    ++emitted;
    if (!validate_routing(res.best, m).empty()) ++rejected;
    check_soc(m, res.best, true);
  }
  for (int k = 0; k < 20; ++k) {
    const auto ds = gen_demands(60, {}, stream_seed(107, "c7-pool", k));
    ++emitted;
    if (!validate_pooling(beam_search(ds, PoolingConfig{}).solution, ds, PoolingConfig{}).empty()) ++rejected;
  }
  const double t = seconds_since(t0);
  return {incoherent == 0 && soc_errors == 0 && tie_errors == 0 && rejected == 0 && t < 120.0,
          fmt("%ld moves: %ld incoherent, %ld SoC errors, %ld mode-tie errors; %ld/%ld emitted solutions invalid; %.1f s",
              moves, incoherent, soc_errors, tie_errors, rejected, emitted, t)};
}

Outcome penalty_schedule() {
  VnsParams p;
  PenaltyState up;
  for (int k = 0; k < 20; ++k) up = update_penalty(up, k != 17, p);
  PenaltyState down;
  down.lambda = 100.0;
  for (int k = 0; k < 20; ++k) down = update_penalty(down, k >= 15, p);
  return {up.lambda == 100.0 && down.lambda == 25.0,
          fmt("invalid in streak 0 -> %g, all-valid streak 100 -> %g", up.lambda, down.lambda)};
}

// New bookings are drawn until the timing relaxation does not rule them out;
// a booking no assignment can serve cannot be accepted by any solver.
Outcome online_acceptance() {
  const auto t0 = clock_type::now();
  int accepted = 0, unsound = 0, redrawn = 0;
  double slowest = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto base = gen_routing_instance(12, 3, Scenario::Low, stream_seed(109, "c9-infra", trial));
    const auto initial = gen_bookings(100, {}, base.network, stream_seed(109, "c9-initial", trial));
    Session session(base, {}, stream_seed(109, "c9-session", trial));
    session.bootstrap(initial, 10.0);
    std::optional<Booking> pick;
    for (int draw = 0; !pick; ++draw) {
      auto b = gen_bookings(1, {}, base.network, stream_seed(109, "c9-new", trial * 1000 + draw), 1000).front();
      if (session.relaxation_admits(b)) pick = b;
      else ++redrawn;
    }
    const auto p = session.propose(*pick, 10.0);
    if (p.accepted) {
      ++accepted;
      slowest = std::max(slowest, p.elapsed_seconds);
      const auto inst = session.instance();
      const RoutingModel m(inst);
      if (!validate_routing(session.solution(), m).empty() || !session.solution().unserved.empty()) ++unsound;
    }
  }
  const double t = seconds_since(t0);
  return {accepted == 20 && unsound == 0 && slowest <= 10.0 && t < 900.0,
          fmt("accepted %d/20 within 10 s (slowest %.2f s), %d unsound acceptances, %d candidates redrawn, %.1f s",
              accepted, slowest, unsound, redrawn, t)};
}

Outcome fairness_direction() {
  const auto t0 = clock_type::now();
  FairnessParams p;
  p.premium_shares = {0.2};
  const auto cells = fairness_experiment(p, 110, jobs());
  const auto rp = static_cast<std::size_t>(Category::RegularPure);
  const auto rm = static_cast<std::size_t>(Category::RegularMixed);
  std::vector<double> alpha, wait_gap, last_gap;
  Stat wait0, last0;
  for (const auto& c : cells) {
    const auto& s = c.sample;
    if (s.wait[rp].empty() || s.wait[rm].empty()) continue;
    const double wg = s.wait[rm].mean - s.wait[rp].mean;
    const double lg = s.last_arrival[rp].mean - s.last_arrival[rm].mean;
    alpha.push_back(c.alpha_regular);
    wait_gap.push_back(wg);
    last_gap.push_back(lg);
    if (c.alpha_regular == 0.0) {
      wait0.add(wg);
      last0.add(lg);
    }
  }
  const auto cw = spearman(alpha, wait_gap);
  const auto cl = spearman(alpha, last_gap);
  const double t = seconds_since(t0);
  const bool pass = wait0.mean > 0.0 && last0.mean > 0.0 && cw.rho < 0.0 && cw.p_value < 0.05 && cl.rho < 0.0 &&
                    cl.p_value < 0.05 && t < 1800.0;
  return {pass, fmt("alpha=0: wait gap %.2f min, last-arrival gap %.3f; trend wait rho %.3f p %.2g, "
                    "last-arrival rho %.3f p %.2g over %zu cells; %.1f s",
                    wait0.mean, last0.mean, cw.rho, cw.p_value, cl.rho, cl.p_value, alpha.size(), t)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"pooling oracle equivalence", pooling_oracle},
      {"class QoS ordering", class_qos},
      {"pooling scale trend", scale_trend},
      {"beam speed", beam_speed},
      {"low-demand routing service", low_demand_service},
      {"routing oracle equivalence", routing_oracle},
      {"validators and properties", validators},
      {"penalty schedule", penalty_schedule},
      {"online acceptance", online_acceptance},
      {"fairness direction", fairness_direction},
  };
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << id << " [" << criteria[i].first << "] " << (o.pass ? "PASS" : "FAIL") << ": "
              << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
