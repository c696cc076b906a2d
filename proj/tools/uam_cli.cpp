// Command-line front end: generators, solvers, oracles, experiment drivers
// and the online booking session. Every run writes its output next to a
// run manifest (<out>.manifest.json).

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "uam/analytics.hpp"
#include "uam/online.hpp"
#include "uam/oracles.hpp"
#include "uam/validate.hpp"

using namespace uam;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kInfeasible = 1;
constexpr int kUsage = 2;

using Clock = std::chrono::steady_clock;

/// Collects what the manifest needs while a subcommand runs.
struct Run {
  CLI::App* sub = nullptr;
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  Json timings = Json::object();
  Clock::time_point start = Clock::now();
};

Json parameters(const CLI::App& sub) {
  Json p = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const auto name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    if (opt->get_items_expected_max() == 0) {
      p[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      const auto& res = opt->results();
      p[name] = res.size() == 1 ? Json(res.front()) : Json(res);
    } else {
      p[name] = opt->get_default_str();
    }
  }
  return p;
}

void write_manifest(const Run& run, const std::string& out) {
  Json m = document("run_manifest", {});
  m["subcommand"] = run.sub->get_name();
  m["parameters"] = parameters(*run.sub);
  m["seed"] = run.seed;
  m["inputs"] = run.inputs;
  m["outputs"] = run.outputs;
  m["version"] = kToolVersion;
  Json t = run.timings;
  t["total_seconds"] = std::chrono::duration<double>(Clock::now() - run.start).count();
  m["timings"] = t;
  save_json(out + ".manifest.json", m);
}

void emit(Run& run, const std::string& path, const Json& doc) {
  if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  save_json(path, doc);
  run.outputs.push_back(path);
}

Json load_input(Run& run, const std::string& path) {
  run.inputs.push_back(path);
  return load_json(path);
}

std::ofstream open_csv(Run& run, const std::string& path) {
  if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  out << std::setprecision(10);
  run.outputs.push_back(path);
  return out;
}

Json stat_json(const Stat& s) { return {{"n", s.count}, {"mean", s.mean}, {"std", s.stddev()}}; }

Json pooling_metrics_json(const PoolingMetrics& m) {
  return {{"n_requests", m.n_requests},
          {"requests_load", m.requests_load},
          {"passengers_load", m.passengers_load},
          {"wt_premium", stat_json(m.wt_premium)},
          {"wt_regular", stat_json(m.wt_regular)},
          {"wt_peak_premium", stat_json(m.wt_peak_premium)},
          {"wt_peak_regular", stat_json(m.wt_peak_regular)},
          {"wt_offpeak_premium", stat_json(m.wt_offpeak_premium)},
          {"wt_offpeak_regular", stat_json(m.wt_offpeak_regular)}};
}

Json routing_metrics_json(const RoutingMetrics& m) {
  Json j = {{"served", m.served}, {"total", m.total}, {"pct_service", m.pct_service},
            {"n_charge", m.n_charge}, {"n_fast", m.n_fast}, {"pct_fast", m.pct_fast}};
  j["cps"] = m.cps ? Json(*m.cps) : Json(nullptr);
  return j;
}

Json objective_json(const SearchObjective& o) {
  return {{"n_unserved", o.n_unserved}, {"n_fast", o.n_fast}, {"monetary", o.monetary}};
}

// ---------------------------------------------------------------------------
// Shared option groups
// ---------------------------------------------------------------------------

struct PoolingFlags {
  PoolingConfig cfg;
  void add(CLI::App* sub) {
    sub->add_option("--capacity", cfg.capacity, "seats per aircraft")->capture_default_str();
    sub->add_option("--t-regular", cfg.t_regular, "max expected wait of regular demands (min)")->capture_default_str();
    sub->add_option("--t-premium", cfg.t_premium, "max expected wait of premium demands (min)")->capture_default_str();
    sub->add_option("--alpha-regular", cfg.alpha_regular, "wait weight of regular demands")->capture_default_str();
    sub->add_option("--alpha-premium", cfg.alpha_premium, "wait weight of premium demands")->capture_default_str();
    sub->add_option("--lambda-p", cfg.lambda_p, "group penalty (0 = derived from D)")->capture_default_str();
    sub->add_option("--beam-width", cfg.beam_width, "beam width W")->capture_default_str()->check(CLI::PositiveNumber);
  }
};

struct VnsFlags {
  double budget = 1800.0;
  long max_iterations = 0;
  void add(CLI::App* sub) {
    sub->add_option("--budget", budget, "search time budget (s)")->capture_default_str()->check(CLI::NonNegativeNumber);
    sub->add_option("--max-iterations", max_iterations, "iteration cap, 0 = none (fixes results independently of timing)")
        ->capture_default_str();
  }
  [[nodiscard]] VnsOptions options() const {
    VnsOptions o;
    o.time_budget_seconds = budget;
    o.max_iterations = max_iterations;
    return o;
  }
};

std::vector<RoutingScenario> parse_scenarios(const std::vector<std::string>& specs) {
  std::vector<RoutingScenario> out;
  for (const auto& s : specs) {
    // <aircraft>x<vertiports><l|i|h>, e.g. 3x3l
    const auto x = s.find('x');
    if (x == std::string::npos || s.size() < x + 3) throw InvalidInput("bad scenario '" + s + "' (expected e.g. 3x3l)");
    try {
      RoutingScenario r;
      r.aircraft = std::stoi(s.substr(0, x));
      r.vertiports = std::stoi(s.substr(x + 1, s.size() - x - 2));
      r.scenario = parse_scenario(s.substr(s.size() - 1));
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw InvalidInput("bad scenario '" + s + "' (expected e.g. 3x3l)");
    }
  }
  return out;
}

std::string scenario_name(const RoutingScenario& s) {
  return std::to_string(s.aircraft) + "x" + std::to_string(s.vertiports) + to_string(s.scenario)[0];
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int run_pool(Run& run, const std::string& in, const std::string& out, PoolingConfig cfg, bool exact) {
  const auto demands = read_document<std::vector<Demand>>(load_input(run, in), "demands", "demands");
  if (demands.empty()) throw InvalidInput("no demands");
  const auto t0 = Clock::now();
  PoolingSolution sol;
  double objective = 0.0, lambda = 0.0;
  Json extra = Json::object();
  if (exact) {
    const auto r = exact_pooling(demands, cfg);
    sol = r.solution;
    objective = r.objective;
    lambda = r.lambda_p;
    extra["nodes"] = r.nodes;
  } else {
    const auto r = beam_search(demands, cfg);
    sol = r.solution;
    objective = r.objective;
    lambda = r.lambda_p;
  }
  run.timings["solve_seconds"] = std::chrono::duration<double>(Clock::now() - t0).count();
  const auto violations = validate_pooling(sol, demands, cfg);
  Json body = {{"solution", sol},
               {"objective", objective},
               {"lambda_p", lambda},
               {"method", exact ? "exact" : "beam"},
               {"metrics", pooling_metrics_json(pooling_metrics(sol, demands, default_peak_windows()))}};
  for (auto& [k, v] : extra.items()) body[k] = v;
  emit(run, out, document("pooling_solution", body));
  if (!violations.empty()) {
    std::cerr << "invalid pooling solution: " << describe(violations) << '\n';
    return kInfeasible;
  }
  std::cout << "groups " << sol.groups.size() << " objective " << objective << '\n';
  return kOk;
}

int run_route(Run& run, const std::string& in, const std::string& out, const VnsFlags& vf, bool exact) {
  const auto inst = read_document<RoutingInstance>(load_input(run, in), "routing_instance", "instance");
  check_instance(inst);
  const RoutingModel model(inst);
  const auto t0 = Clock::now();
  RoutingSolution sol;
  Json extra = Json::object();
  if (exact) {
    sol = exact_routing(inst).solution;
  } else {
    Rng rng = make_stream(run.seed, "vns");
    const auto res = uam_vns(model, initial_solution(model, rng), rng, vf.options());
    sol = res.best;
    extra["iterations"] = res.iterations;
    extra["final_lambda"] = res.final_lambda;
  }
  run.timings["solve_seconds"] = std::chrono::duration<double>(Clock::now() - t0).count();
  const auto obj = evaluate(model, sol, 0.0);
  Json body = {{"solution", sol},
               {"objective", objective_json(obj)},
               {"method", exact ? "exact" : "vns"},
               {"metrics", routing_metrics_json(routing_metrics(sol, model))}};
  for (auto& [k, v] : extra.items()) body[k] = v;
  emit(run, out, document("routing_solution", body));
  const auto violations = validate_routing(sol, model);
  if (!violations.empty()) {
    std::cerr << "invalid routing solution: " << describe(violations) << '\n';
    return kInfeasible;
  }
  std::cout << "served " << inst.requests.size() - sol.unserved.size() << "/" << inst.requests.size() << " fast "
            << obj.n_fast << " money " << obj.monetary << '\n';
  return obj.n_unserved == 0 ? kOk : kInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Urban air-taxi pooling and fleet routing toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Run run;
  std::string in, out, csv, booking_path;
  bool exact = false;
  int jobs = 1;
  std::function<int()> action;

  auto common = [&](CLI::App* sub, bool needs_out = true) {
    sub->add_option("--seed", run.seed, "master seed")->capture_default_str();
    auto* o = sub->add_option("--out", out, "output JSON path");
    if (needs_out) o->required();
  };

  // gen-demands
  int n_demands = 100;
  DemandModel dmodel;
  auto* gd = app.add_subcommand("gen-demands", "generate commuter-style demands");
  gd->add_option("--n", n_demands, "number of demands")->capture_default_str()->check(CLI::PositiveNumber);
  gd->add_option("--premium-share", dmodel.premium_prob, "probability of a premium demand")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  common(gd);
  gd->callback([&] {
    action = [&] {
      const auto ds = gen_demands(n_demands, dmodel, stream_seed(run.seed, "demands"));
      emit(run, out, document("demands", {{"demands", ds}}));
      return kOk;
    };
  });

  // gen-infra
  int aircraft = 3, vertiports = 3, requests = 0;
  std::string scenario = "low";
  auto* gi = app.add_subcommand("gen-infra", "generate a routing instance (network, fleet, requests)");
  gi->add_option("--aircraft", aircraft)->capture_default_str()->check(CLI::PositiveNumber);
  gi->add_option("--vertiports", vertiports)->capture_default_str()->check(CLI::Range(2, 1000));
  gi->add_option("--scenario", scenario, "low | intermediate | high")->capture_default_str();
  gi->add_option("--requests", requests, "override the request count (0 = scenario rate)")->capture_default_str();
  common(gi);
  gi->callback([&] {
    action = [&] {
      InfraModel im;
      if (requests > 0) im.request_count = requests;
      const auto inst = gen_routing_instance(aircraft, vertiports, parse_scenario(scenario), stream_seed(run.seed, "infra"), im);
      emit(run, out, document("routing_instance", {{"instance", inst}}));
      return kOk;
    };
  });

  // pool / exact-pool
  PoolingFlags pf;
  auto* pl = app.add_subcommand("pool", "pool demands into flights by beam search");
  pl->add_option("--demands", in, "demands JSON")->required();
  pl->add_flag("--exact", exact, "use the exhaustive oracle (small D only)");
  pf.add(pl);
  common(pl);
  pl->callback([&] { action = [&] { return run_pool(run, in, out, pf.cfg, exact); }; });

  auto* ep = app.add_subcommand("exact-pool", "exhaustive optimal pooling (small D only)");
  ep->add_option("--demands", in, "demands JSON")->required();
  pf.add(ep);
  common(ep);
  ep->callback([&] { action = [&] { return run_pool(run, in, out, pf.cfg, true); }; });

  // route / exact-route
  VnsFlags vf;
  auto* rt = app.add_subcommand("route", "route and recharge the fleet");
  rt->add_option("--instance", in, "routing instance JSON")->required();
  rt->add_flag("--exact", exact, "use the exhaustive oracle (tiny instances only)");
  vf.add(rt);
  common(rt);
  rt->callback([&] { action = [&] { return run_route(run, in, out, vf, exact); }; });

  auto* er = app.add_subcommand("exact-route", "exhaustive optimal routing (tiny instances only)");
  er->add_option("--instance", in, "routing instance JSON")->required();
  common(er);
  er->callback([&] { action = [&] { return run_route(run, in, out, vf, true); }; });

  // pipeline
  std::string out_dir;
  auto* pp = app.add_subcommand("pipeline", "generate demands and infrastructure, pool, then route");
  pp->add_option("--aircraft", aircraft)->capture_default_str()->check(CLI::PositiveNumber);
  pp->add_option("--vertiports", vertiports)->capture_default_str()->check(CLI::Range(2, 1000));
  pp->add_option("--n", n_demands, "number of demands")->capture_default_str()->check(CLI::PositiveNumber);
  pp->add_option("--premium-share", dmodel.premium_prob)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  pp->add_option("--out-dir", out_dir, "directory for all outputs")->required();
  pp->add_option("--seed", run.seed, "master seed")->capture_default_str();
  pf.add(pp);
  vf.add(pp);
  pp->callback([&] {
    action = [&] {
      InfraModel im;
      im.request_count = 0;
      auto inst = gen_routing_instance(aircraft, vertiports, Scenario::Low, stream_seed(run.seed, "infra"), im);
      const auto bookings = gen_bookings(n_demands, dmodel, inst.network, stream_seed(run.seed, "bookings"));
      std::map<std::pair<int, int>, std::vector<Demand>> by_pair;
      for (const auto& b : bookings) by_pair[{b.origin, b.destination}].push_back(b.demand);
      Json pools = Json::array();
      const auto t0 = Clock::now();
      for (const auto& [pair, ds] : by_pair) {
        const auto res = beam_search(ds, pf.cfg);
        const auto reqs = to_requests(res.solution, ds, pair.first, pair.second, inst.network, im.value_per_passenger,
                                      static_cast<int>(inst.requests.size()));
        inst.requests.insert(inst.requests.end(), reqs.begin(), reqs.end());
        pools.push_back({{"origin", pair.first}, {"destination", pair.second}, {"solution", res.solution},
                         {"objective", res.objective}});
      }
      run.timings["pooling_seconds"] = std::chrono::duration<double>(Clock::now() - t0).count();
      check_instance(inst);
      emit(run, out_dir + "/bookings.json", document("bookings", {{"bookings", bookings}}));
      emit(run, out_dir + "/pooling.json", document("pooling_by_pair", {{"pairs", pools}}));
      emit(run, out_dir + "/instance.json", document("routing_instance", {{"instance", inst}}));
      const RoutingModel model(inst);
      Rng rng = make_stream(run.seed, "vns");
      const auto t1 = Clock::now();
      const auto res = uam_vns(model, initial_solution(model, rng), rng, vf.options());
      run.timings["routing_seconds"] = std::chrono::duration<double>(Clock::now() - t1).count();
      emit(run, out_dir + "/routing.json",
           document("routing_solution", {{"solution", res.best},
                                         {"objective", objective_json(res.objective)},
                                         {"method", "vns"},
                                         {"iterations", res.iterations},
                                         {"metrics", routing_metrics_json(routing_metrics(res.best, model))}}));
      out = out_dir + "/run";
      std::cout << "demands " << bookings.size() << " requests " << inst.requests.size() << " served "
                << inst.requests.size() - res.best.unserved.size() << '\n';
      return res.objective.n_unserved == 0 ? kOk : kInfeasible;
    };
  });

  // online
  int initial = 100;
  double bootstrap_budget = 20.0, online_budget = 10.0;
  std::vector<double> checkpoints{5.0, 10.0, 20.0, 30.0};
  bool report = false;
  aircraft = 3;
  auto* on = app.add_subcommand("online", "bootstrap a booking session, then accept or reject one new booking");
  on->add_option("--instance", in, "base routing instance (its requests are ignored); generated when omitted");
  on->add_option("--aircraft", aircraft, "fleet size when generating")->capture_default_str();
  on->add_option("--vertiports", vertiports, "vertiports when generating")->capture_default_str();
  on->add_option("--initial", initial, "bookings accepted before the new one")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  on->add_option("--booking", booking_path, "new booking JSON (generated when omitted)");
  on->add_option("--bootstrap-budget", bootstrap_budget, "budget per bootstrap round (s)")->capture_default_str();
  on->add_option("--budget", online_budget, "decision budget for the new booking (s)")->capture_default_str();
  on->add_flag("--checkpoints", report, "report acceptance at each checkpoint of --checkpoint-list");
  on->add_option("--checkpoint-list", checkpoints, "checkpoint seconds")->capture_default_str();
  common(on);
  on->callback([&] {
    action = [&] {
      RoutingInstance base;
      if (!in.empty())
        base = read_document<RoutingInstance>(load_input(run, in), "routing_instance", "instance");
      else
        base = gen_routing_instance(aircraft, vertiports, Scenario::Low, stream_seed(run.seed, "infra"));
      const auto pool = gen_bookings(initial + 1, {}, base.network, stream_seed(run.seed, "bookings"));
      Booking next = pool.back();
      if (!booking_path.empty())
        next = read_document<Booking>(load_input(run, booking_path), "booking", "booking");
      Session session(base, {}, stream_seed(run.seed, "session"));
      const auto t0 = Clock::now();
      const auto dropped = initial > 0 ? session.bootstrap({pool.begin(), pool.end() - 1}, bootstrap_budget)
                                       : std::vector<Booking>{};
      run.timings["bootstrap_seconds"] = std::chrono::duration<double>(Clock::now() - t0).count();
      std::optional<bool> admits;
      try {
        admits = session.relaxation_admits(next);
      } catch (const InvalidInput&) {
      }
      Proposal p;
      Json statuses = Json::array();
      if (report) {
        const auto rep = checkpoint_report(session, next, checkpoints);
        p = rep.proposal;
        for (std::size_t k = 0; k < rep.checkpoints.size(); ++k)
          statuses.push_back({{"seconds", rep.checkpoints[k]}, {"accepted", static_cast<bool>(rep.accepted_by[k])}});
      } else {
        p = session.propose(next, online_budget);
      }
      run.timings["decision_seconds"] = p.elapsed_seconds;
      Json body = {{"accepted", p.accepted},
                   {"booking", next},
                   {"dropped_at_bootstrap", dropped.size()},
                   {"timing_relaxation_admits", admits ? Json(*admits) : Json(nullptr)},
                   {"first_success_seconds", p.first_success_seconds ? Json(*p.first_success_seconds) : Json(nullptr)},
                   {"replaced_requests", p.replaced_requests},
                   {"added_requests", p.added_requests},
                   {"session", session.snapshot()},
                   {"fingerprint", session.fingerprint()}};
      if (report) body["checkpoints"] = statuses;
      if (!p.error.empty()) body["error"] = p.error;
      emit(run, out, document("online_decision", body));
      std::cout << (p.accepted ? "ACCEPT" : "REJECT") << " after " << p.elapsed_seconds << " s";
      if (!p.error.empty()) std::cout << " (" << p.error << ")";
      std::cout << '\n';
      if (!p.error.empty()) return kUsage;
      return p.accepted ? kOk : kInfeasible;
    };
  });

  // bench-pooling
  std::vector<int> sizes{10, 20, 50, 100};
  int reps = 20;
  auto* bp = app.add_subcommand("bench-pooling", "beam search over a grid of demand counts");
  bp->add_option("--sizes", sizes, "demand counts")->capture_default_str();
  bp->add_option("--reps", reps, "repetitions per size")->capture_default_str()->check(CLI::PositiveNumber);
  bp->add_option("--csv", csv, "per-run CSV")->required();
  bp->add_option("--jobs", jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  pf.add(bp);
  common(bp);
  bp->callback([&] {
    action = [&] {
      const auto rows = bench_pooling(sizes, reps, pf.cfg, dmodel, run.seed, jobs);
      auto f = open_csv(run, csv);
      f << "demands,repetition,objective,n_requests,requests_load,passengers_load,wt_premium_mean,wt_premium_std,"
           "wt_regular_mean,wt_regular_std,seconds\n";
      std::map<int, std::array<Stat, 4>> summary;
      for (const auto& r : rows) {
        const auto& m = r.metrics;
        f << r.demands << ',' << r.repetition << ',' << r.objective << ',' << m.n_requests << ',' << m.requests_load
          << ',' << m.passengers_load << ',' << m.wt_premium.mean << ',' << m.wt_premium.stddev() << ','
          << m.wt_regular.mean << ',' << m.wt_regular.stddev() << ',' << r.seconds << '\n';
        auto& s = summary[r.demands];
        s[0].add(m.n_requests);
        s[1].add(m.requests_load);
        s[2].add(m.passengers_load);
        s[3].add(r.seconds);
      }
      Json j = Json::array();
      for (const auto& [d, s] : summary)
        j.push_back({{"demands", d}, {"n_requests", stat_json(s[0])}, {"requests_load", stat_json(s[1])},
                     {"passengers_load", stat_json(s[2])}, {"seconds", stat_json(s[3])}});
      emit(run, out, document("bench_pooling", {{"rows", j}}));
      return kOk;
    };
  });

  // bench-routing
  std::vector<std::string> scenario_specs{"3x3l", "3x3i", "3x3h"};
  double budget = 60.0;
  auto* br = app.add_subcommand("bench-routing", "VNS over a grid of fleet / network / demand scenarios");
  br->add_option("--scenarios", scenario_specs, "scenarios as <aircraft>x<vertiports><l|i|h>")->capture_default_str();
  br->add_option("--reps", reps, "runs per scenario")->capture_default_str()->check(CLI::PositiveNumber);
  br->add_option("--budget", budget, "time budget per run (s)")->capture_default_str();
  br->add_option("--csv", csv, "per-run CSV")->required();
  br->add_option("--jobs", jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  common(br);
  br->callback([&] {
    action = [&] {
      const auto scen = parse_scenarios(scenario_specs);
      const auto rows = bench_routing(scen, reps, budget, run.seed, jobs);
      auto f = open_csv(run, csv);
      f << "scenario,requests,repetition,pct_service,n_charge,n_fast,pct_fast,cps,monetary,iterations,seconds\n";
      std::map<std::string, std::array<Stat, 4>> summary;
      for (const auto& r : rows) {
        const auto name = scenario_name(r.scenario);
        f << name << ',' << r.requests << ',' << r.repetition << ',' << r.metrics.pct_service << ','
          << r.metrics.n_charge << ',' << r.metrics.n_fast << ',' << r.metrics.pct_fast << ','
          << (r.metrics.cps ? *r.metrics.cps : std::nan("")) << ',' << r.objective.monetary << ','
          << r.iterations << ',' << r.seconds << '\n';
        auto& s = summary[name];
        s[0].add(r.metrics.pct_service);
        s[1].add(r.metrics.n_charge);
        s[2].add(r.metrics.pct_fast);
        if (r.metrics.cps) s[3].add(*r.metrics.cps);
      }
      Json j = Json::array();
      for (const auto& [name, s] : summary)
        j.push_back({{"scenario", name}, {"pct_service", stat_json(s[0])}, {"n_charge", stat_json(s[1])},
                     {"pct_fast", stat_json(s[2])}, {"cps", stat_json(s[3])}});
      emit(run, out, document("bench_routing", {{"rows", j}}));
      return kOk;
    };
  });

  // fairness
  FairnessParams fp;
  auto* fa = app.add_subcommand("fairness", "group composition fairness experiment");
  fa->add_option("--alphas", fp.alpha_regular, "regular wait weights")->capture_default_str();
  fa->add_option("--shares", fp.premium_shares, "premium shares")->capture_default_str();
  fa->add_option("--reps", fp.repetitions, "repetitions per cell")->capture_default_str()->check(CLI::PositiveNumber);
  fa->add_option("--n", fp.demands, "demands per instance")->capture_default_str()->check(CLI::PositiveNumber);
  fa->add_option("--csv", csv, "per-cell CSV")->required();
  fa->add_option("--jobs", jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  common(fa);
  fa->callback([&] {
    action = [&] {
      const auto cells = fairness_experiment(fp, run.seed, jobs);
      auto f = open_csv(run, csv);
      f << "alpha_regular,premium_share,repetition,category,n,wait_mean,wait_std,last_arrival_freq\n";
      std::map<std::pair<double, double>, std::array<Stat, 4>> waits, last;
      for (const auto& c : cells)
        for (std::size_t k = 0; k < kCategories.size(); ++k) {
          const auto& w = c.sample.wait[k];
          const auto& l = c.sample.last_arrival[k];
          f << c.alpha_regular << ',' << c.premium_share << ',' << c.repetition << ',' << to_string(kCategories[k])
            << ',' << w.count << ',' << w.mean << ',' << w.stddev() << ',' << l.mean << '\n';
          if (!w.empty()) {
            waits[{c.premium_share, c.alpha_regular}][k].add(w.mean);
            last[{c.premium_share, c.alpha_regular}][k].add(l.mean);
          }
        }
      Json j = Json::array();
      for (const auto& [key, w] : waits) {
        Json cats = Json::object();
        for (std::size_t k = 0; k < kCategories.size(); ++k)
          cats[to_string(kCategories[k])] = {{"wait", stat_json(w[k])}, {"last_arrival", stat_json(last[key][k])}};
        j.push_back({{"premium_share", key.first}, {"alpha_regular", key.second}, {"categories", cats}});
      }
      emit(run, out, document("fairness", {{"cells", j}}));
      return kOk;
    };
  });

  // sweep
  QosSweepParams sp;
  auto* sw = app.add_subcommand("sweep", "per-class mean waits over t_premium x alpha_regular");
  sw->add_option("--t-premium", sp.t_premium, "premium wait limits")->capture_default_str();
  sw->add_option("--alphas", sp.alpha_regular, "regular wait weights")->capture_default_str();
  sw->add_option("--reps", sp.repetitions, "repetitions per cell")->capture_default_str()->check(CLI::PositiveNumber);
  sw->add_option("--n", sp.demands, "demands per instance")->capture_default_str()->check(CLI::PositiveNumber);
  sw->add_option("--csv", csv, "grid CSV")->required();
  sw->add_option("--jobs", jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  common(sw);
  sw->callback([&] {
    action = [&] {
      const auto s = sweep_qos(sp, run.seed, jobs);
      auto f = open_csv(run, csv);
      f << "t_premium,alpha_regular,regular_mean_wait,premium_mean_wait\n";
      for (std::size_t t = 0; t < s.t_premium.size(); ++t)
        for (std::size_t a = 0; a < s.alpha_regular.size(); ++a)
          f << s.t_premium[t] << ',' << s.alpha_regular[a] << ',' << s.regular_mean[t][a] << ','
            << s.premium_mean[t][a] << '\n';
      emit(run, out, document("qos_sweep", {{"t_premium", s.t_premium}, {"alpha_regular", s.alpha_regular},
                                            {"regular_mean", s.regular_mean}, {"premium_mean", s.premium_mean}}));
      return kOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  for (auto* sub : app.get_subcommands()) run.sub = sub;
  try {
    const int code = action();
    write_manifest(run, out);
    return code;
  } catch (const OracleRefusal& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
