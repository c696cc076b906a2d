#pragma once

// Accept-or-reject booking session. The session keeps one beam state per
// origin-destination pair and a routing solution serving every current
// flight request. A proposal extends one beam by a level, re-derives that
// pair's requests, warm-starts the VNS from the current routes and commits
// only if every request gets served within the time budget.

#include <iomanip>
#include <map>
#include <set>

#include "uam/instgen.hpp"
#include "uam/json_io.hpp"
#include "uam/oracles.hpp"
#include "uam/vns.hpp"

namespace uam {

struct OnlineConfig {
  PoolingConfig pooling;
  double value_per_passenger = 120.0;
  /// Group penalty of the session beams, fixed for the session's lifetime
  /// so scores stay comparable as demands arrive. Zero derives it from
  /// `lambda_demands_hint`.
  double lambda_p = 0.0;
  std::size_t lambda_demands_hint = 10000;

  [[nodiscard]] double resolved_lambda() const {
    return lambda_p > 0.0 ? lambda_p : pooling.resolved_lambda(lambda_demands_hint);
  }
};

/// Flight request plus the demands it carries.
struct PooledRequest {
  FlightRequest request;
  std::vector<int> members;

  bool operator==(const PooledRequest&) const = default;
};

struct Proposal {
  bool accepted = false;
  double elapsed_seconds = 0.0;
  std::optional<double> first_success_seconds;
  std::vector<int> replaced_requests;  // requests rebuilt because their group changed
  std::vector<int> added_requests;
  std::string error;  // set when the booking is malformed
};

class Session {
public:
  /// `base` supplies network, fleet, battery and routing configuration; its
  /// requests are ignored.
  Session(RoutingInstance base, OnlineConfig cfg, std::uint64_t seed)
      : base_(std::move(base)), cfg_(std::move(cfg)), seed_(seed) {
    base_.requests.clear();
    cfg_.pooling.check();
    base_.network.check();
    base_.battery.check();
    solution_ = all_unserved(base_);
  }

  [[nodiscard]] const std::vector<Booking>& bookings() const { return bookings_; }
  [[nodiscard]] const std::vector<PooledRequest>& requests() const { return requests_; }
  [[nodiscard]] const RoutingSolution& solution() const { return solution_; }
  [[nodiscard]] const OnlineConfig& config() const { return cfg_; }

  [[nodiscard]] RoutingInstance instance() const {
    RoutingInstance inst = base_;
    for (const auto& r : requests_) inst.requests.push_back(r.request);
    return inst;
  }

  /// Throws InvalidInput when the booking cannot be considered at all.
  void check_booking(const Booking& b) const {
    check_demand(b.demand, cfg_.pooling);
    if (!base_.network.has_leg(b.origin, b.destination))
      throw InvalidInput("booking " + std::to_string(b.demand.id) + ": leg not bookable");
    for (const auto& old : bookings_)
      if (old.demand.id == b.demand.id)
        throw InvalidInput("booking " + std::to_string(b.demand.id) + ": duplicate demand id");
  }

  /// Tries to add one booking. The pair's committed partition stays fixed:
  /// the new demand either joins one of its groups or flies alone, options
  /// tried best score first, each with an equal share of the remaining
  /// budget (options failing the timing relaxation are skipped). On
  /// rejection the session is left untouched.
  Proposal propose(const Booking& b, double budget_seconds) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto since = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };
    Proposal out;
    try {
      check_booking(b);
    } catch (const InvalidInput& e) {
      out.error = e.what();
      return out;
    }
    const auto [beam, options] = pooling_options(b);
    for (std::size_t k = 0; k < options.size(); ++k) {
      const double remaining = budget_seconds - since();
      if (remaining <= 0.0) break;
      Proposal attempt;
      Session next = with_option(b, beam, options[k], attempt);
      const auto inst = next.instance();
      const RoutingModel model(inst);
      // Certainly unservable on timing alone: leave its budget to the others.
      if (timing_relaxation_bound(model) < static_cast<int>(inst.requests.size())) continue;
      const auto start = next.warm_start(model);
      Rng rng = make_stream(seed_, "online", bookings_.size() * 64 + k);
      VnsOptions opts;
      opts.time_budget_seconds = remaining / static_cast<double>(options.size() - k);
      opts.stop_on_stagnation = false;
      opts.stop_when = [](const SearchObjective& o) { return o.n_unserved == 0; };
      const auto res = uam_vns(model, start, rng, opts);
      if (res.objective.n_unserved == 0 && res.objective.violation <= 1e-9) {
        next.solution_ = res.best;
        *this = std::move(next);
        out.accepted = true;
        out.first_success_seconds = since();
        out.replaced_requests = std::move(attempt.replaced_requests);
        out.added_requests = std::move(attempt.added_requests);
        break;
      }
    }
    out.elapsed_seconds = since();
    return out;
  }

  /// Necessary condition for accepting `b`: some way of pooling it leaves a
  /// request set whose timing-only relaxation serves every request.
  [[nodiscard]] bool relaxation_admits(const Booking& b) const {
    check_booking(b);
    const auto [beam, options] = pooling_options(b);
    for (const auto& option : options) {
      Proposal ignored;
      const Session next = with_option(b, beam, option, ignored);
      const auto inst = next.instance();
      const RoutingModel model(inst);
      if (timing_relaxation_bound(model) == static_cast<int>(inst.requests.size())) return true;
    }
    return false;
  }

  /// Starts the day from a batch of bookings. Bookings whose flights cannot
  /// all be served are dropped (returned) and the rest re-pooled until a
  /// fully served configuration remains.
  std::vector<Booking> bootstrap(std::vector<Booking> batch, double budget_seconds) {
    if (!bookings_.empty()) throw std::logic_error("bootstrap on a non-empty session");
    std::vector<Booking> dropped;
    for (int round = 0;; ++round) {
      Session fresh(base_, cfg_, seed_);
      std::vector<Booking> kept;
      for (const auto& b : batch) {
        try {
          fresh.check_booking(b);
        } catch (const InvalidInput&) {
          dropped.push_back(b);
          continue;
        }
        fresh.bookings_.push_back(b);
        const auto pair = std::pair{b.origin, b.destination};
        fresh.pair_demands_[pair].push_back(b.demand);
        auto it = fresh.beams_.find(pair);
        if (it == fresh.beams_.end())
          fresh.beams_.emplace(pair, start_beam(b.demand, cfg_.pooling, cfg_.resolved_lambda()));
        else
          it->second = extend_incremental(it->second, b.demand, cfg_.pooling);
        kept.push_back(b);
      }
      Proposal ignored;
      for (const auto& [pair, beam] : fresh.beams_) {
        fresh.committed_[pair] = beam.frontier.front();
        fresh.rederive(pair, ignored);
      }
      const auto inst = fresh.instance();
      const RoutingModel model(inst);
      Rng rng = make_stream(seed_, "bootstrap", static_cast<std::uint64_t>(round));
      VnsOptions opts;
      opts.time_budget_seconds = budget_seconds;
      opts.stop_when = [](const SearchObjective& o) { return o.n_unserved == 0; };
      const auto res = uam_vns(model, initial_solution(model, rng), rng, opts);
      if (res.objective.n_unserved == 0) {
        fresh.solution_ = res.best;
        *this = std::move(fresh);
        return dropped;
      }
      std::set<int> drop_ids;
      for (int rid : res.best.unserved)
        for (const auto& r : fresh.requests_)
          if (r.request.id == rid) drop_ids.insert(r.members.begin(), r.members.end());
      batch.clear();
      for (const auto& b : kept) (drop_ids.count(b.demand.id) ? dropped : batch).push_back(b);
    }
  }

  [[nodiscard]] Json snapshot() const {
    Json beams = Json::array();
    for (const auto& [pair, s] : beams_) {
      Json frontier = Json::array();
      for (const auto& n : s.frontier) frontier.push_back({{"labels", n.labels}, {"score", n.score}});
      beams.push_back({{"origin", pair.first},
                       {"destination", pair.second},
                       {"level", s.level},
                       {"lambda_p", s.lambda_p},
                       {"frontier", frontier},
                       {"committed", committed_.at(pair).labels}});
    }
    Json reqs = Json::array();
    for (const auto& r : requests_) reqs.push_back({{"request", r.request}, {"members", r.members}});
    return document("online_session", {{"bookings", bookings_},
                                       {"beams", beams},
                                       {"requests", reqs},
                                       {"solution", solution_},
                                       {"next_request_id", next_request_id_},
                                       {"seed", seed_}});
  }

  /// Stable digest of the snapshot, for rollback checks.
  [[nodiscard]] std::string fingerprint() const {
    const auto text = snapshot().dump();
    std::uint64_t h = fnv1a(text);
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
  }

private:
  /// Next beam state of the booking's pair, and the candidate partitions to
  /// try: the committed partition with the new demand placed in one of its
  /// groups or alone, best score first.
  [[nodiscard]] std::pair<BeamState, std::vector<PartitionNode>> pooling_options(const Booking& b) const {
    const auto pair = std::pair{b.origin, b.destination};
    const double lambda = cfg_.resolved_lambda();
    if (auto it = beams_.find(pair); it == beams_.end()) {
      auto beam = start_beam(b.demand, cfg_.pooling, lambda);
      auto options = beam.frontier;
      return {std::move(beam), std::move(options)};
    } else {
      auto beam = extend_incremental(it->second, b.demand, cfg_.pooling);
      const std::vector<PartitionNode> committed{committed_.at(pair)};
      auto children = extend_prune(committed, b.demand, cfg_.pooling, lambda);
      auto options =
          retrieve_best(std::move(children), static_cast<int>(committed.front().caches.size() + 1));
      return {std::move(beam), std::move(options)};
    }
  }

  /// Copy of the session with `b` booked and its pair committed to `option`;
  /// routes are not updated.
  [[nodiscard]] Session with_option(const Booking& b, const BeamState& beam, const PartitionNode& option,
                                    Proposal& changes) const {
    const auto pair = std::pair{b.origin, b.destination};
    Session next = *this;
    next.bookings_.push_back(b);
    next.pair_demands_[pair].push_back(b.demand);
    next.beams_[pair] = beam;
    next.committed_[pair] = option;
    next.rederive(pair, changes);
    return next;
  }

  /// Replaces the requests of `pair` by the groups of its best beam node,
  /// keeping the id of every group that is unchanged (same members, same
  /// departure).
  void rederive(std::pair<int, int> pair, Proposal& out) {
    const auto& demands = pair_demands_.at(pair);
    const auto sol = to_solution(committed_.at(pair), demands);
    std::map<std::pair<std::vector<int>, double>, int> old_ids;
    std::vector<PooledRequest> others;
    for (auto& r : requests_) {
      if (r.request.origin == pair.first && r.request.destination == pair.second) {
        auto key = r.members;
        std::sort(key.begin(), key.end());
        old_ids.emplace(std::pair{key, r.request.depart_minute}, r.request.id);
      } else {
        others.push_back(std::move(r));
      }
    }
    std::set<int> kept;
    for (std::size_t k = 0; k < sol.groups.size(); ++k) {
      auto key = sol.groups[k];
      std::sort(key.begin(), key.end());
      auto reqs = to_requests(PoolingSolution{{sol.groups[k]}, {sol.departures[k]}}, demands, pair.first,
                              pair.second, base_.network, cfg_.value_per_passenger);
      FlightRequest r = reqs.front();
      auto found = old_ids.find({key, sol.departures[k]});
      if (found != old_ids.end()) {
        r.id = found->second;
        kept.insert(r.id);
      } else {
        r.id = next_request_id_++;
        out.added_requests.push_back(r.id);
      }
      others.push_back({r, key});
    }
    for (const auto& [key, id] : old_ids)
      if (!kept.count(id)) out.replaced_requests.push_back(id);
    std::sort(others.begin(), others.end(),
              [](const PooledRequest& a, const PooledRequest& b) { return a.request.id < b.request.id; });
    requests_ = std::move(others);
    std::sort(out.replaced_requests.begin(), out.replaced_requests.end());
  }

  /// Current routes with vanished requests cut out (the connection that
  /// follows loses its charging plan) and new requests unserved.
  [[nodiscard]] RoutingSolution warm_start(const RoutingModel& model) const {
    RoutingSolution s;
    s.routes.resize(solution_.routes.size());
    std::set<int> placed;
    for (std::size_t a = 0; a < solution_.routes.size(); ++a) {
      for (const auto& v : solution_.routes[a])
        if (model.known(v.request)) s.routes[a].push_back(v);
      // Re-plan connections whose predecessor vanished and drop requests
      // that became unreachable.
      auto& route = s.routes[a];
      std::vector<Visit> fixed;
      for (std::size_t k = 0; k < route.size(); ++k) {
        Visit v = route[k];
        const bool same_prev =
            k == 0 ? pred_of(a, v.request) == -1 : pred_of(a, v.request) == route[k - 1].request;
        if (!same_prev) v.plan = ChargePlan{};
        fixed.push_back(v);
        if (!model.entering(a, fixed, fixed.size() - 1).feasible) fixed.pop_back();
      }
      route = std::move(fixed);
      for (const auto& v : route) placed.insert(v.request);
    }
    for (const auto& r : model.instance().requests)
      if (!placed.count(r.id)) s.unserved.push_back(r.id);
    std::sort(s.unserved.begin(), s.unserved.end());
    return s;
  }

  /// Predecessor of `request` on aircraft `a` in the committed solution
  /// (-1 for the route start).
  [[nodiscard]] int pred_of(std::size_t a, int request) const {
    const auto& r = solution_.routes[a];
    for (std::size_t k = 0; k < r.size(); ++k)
      if (r[k].request == request) return k == 0 ? -1 : r[k - 1].request;
    return -2;
  }

  RoutingInstance base_;
  OnlineConfig cfg_;
  std::uint64_t seed_ = 0;
  std::vector<Booking> bookings_;
  std::map<std::pair<int, int>, std::vector<Demand>> pair_demands_;
  std::map<std::pair<int, int>, BeamState> beams_;
  std::map<std::pair<int, int>, PartitionNode> committed_;
  std::vector<PooledRequest> requests_;
  RoutingSolution solution_;
  int next_request_id_ = 0;
};

struct CheckpointReport {
  std::vector<double> checkpoints;
  std::vector<bool> accepted_by;  // status at each checkpoint
  bool accepted_at_end = false;   // status when the search stopped by itself
  Proposal proposal;
};

/// Runs one proposal with the largest checkpoint as budget and reports the
/// acceptance status the caller would have seen at each checkpoint.
inline CheckpointReport checkpoint_report(Session& session, const Booking& b,
                                          std::vector<double> checkpoints = {5.0, 10.0, 20.0, 30.0}) {
  if (checkpoints.empty()) throw InvalidInput("checkpoint_report: no checkpoints");
  std::sort(checkpoints.begin(), checkpoints.end());
  CheckpointReport rep;
  rep.checkpoints = checkpoints;
  rep.proposal = session.propose(b, checkpoints.back());
  rep.accepted_at_end = rep.proposal.accepted;
  for (double c : checkpoints)
    rep.accepted_by.push_back(rep.proposal.accepted && rep.proposal.first_success_seconds &&
                              *rep.proposal.first_success_seconds <= c);
  return rep;
}

/// Bookings over uniformly drawn bookable legs.
inline std::vector<Booking> gen_bookings(int n, const DemandModel& model, const Network& net, std::uint64_t seed,
                                         int first_id = 0) {
  auto demands = gen_demands(n, model, stream_seed(seed, "demands"));
  Rng rng = make_stream(seed, "legs");
  std::vector<Booking> out;
  for (auto& d : demands) {
    d.id += first_id;
    const auto& [o, t] = detail::pick_uniform(net.legs, rng);
    out.push_back({d, o, t});
  }
  return out;
}

}  // namespace uam
