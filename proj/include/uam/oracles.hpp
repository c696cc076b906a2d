#pragma once

// Exact reference solvers for desk-sized instances: exhaustive set
// partitioning for pooling and assignment enumeration with an integer SoC
// dynamic program for routing. Inputs beyond the limits are refused.

#include <array>
#include <functional>
#include <map>

#include "uam/pooling.hpp"
#include "uam/routing_model.hpp"

namespace uam {

struct OracleLimits {
  int max_demands = 12;
  int max_requests = 6;
  int max_aircraft = 2;
  bool require_integer_data = true;
};

struct ExactPoolingResult {
  PoolingSolution solution;
  double objective = 0.0;
  double lambda_p = 0.0;
  long nodes = 0;
};

/// Minimum-objective partition by depth-first enumeration of restricted
/// growth strings. Partial costs never decrease along a branch (departures
/// only move later), which makes the incumbent a valid cut.
inline ExactPoolingResult exact_pooling(std::span<const Demand> demands, const PoolingConfig& cfg,
                                        const OracleLimits& limits = {}) {
  cfg.check();
  if (static_cast<int>(demands.size()) > limits.max_demands)
    throw OracleRefusal("exact_pooling: " + std::to_string(demands.size()) + " demands exceed the limit of " +
                        std::to_string(limits.max_demands));
  const auto ordered = insertion_order(demands);
  for (const auto& d : ordered) check_demand(d, cfg);
  DemandIndex index(ordered);
  const double lambda = cfg.resolved_lambda(ordered.size());

  ExactPoolingResult res;
  res.lambda_p = lambda;
  if (ordered.empty()) return res;

  double best = std::numeric_limits<double>::infinity();
  std::vector<int> labels, best_labels;
  std::vector<GroupCache> groups;
  labels.reserve(ordered.size());

  auto dfs = [&](auto&& self, std::size_t i, double cost) -> void {
    ++res.nodes;
    if (cost >= best - 1e-12) return;
    if (i == ordered.size()) {
      best = cost;
      best_labels = labels;
      return;
    }
    const Demand& d = ordered[i];
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto delta = detail::join_delta(groups[g], d, cfg);
      if (!delta) continue;
      const GroupCache saved = groups[g];
      groups[g] = detail::joined(saved, d, cfg);
      labels.push_back(static_cast<int>(g));
      self(self, i + 1, cost + *delta);
      labels.pop_back();
      groups[g] = saved;
    }
    groups.push_back(detail::singleton_cache(d, cfg));
    labels.push_back(static_cast<int>(groups.size() - 1));
    self(self, i + 1, cost + detail::group_open_cost(d, cfg, lambda));
    labels.pop_back();
    groups.pop_back();
  };
  dfs(dfs, 0, 0.0);

  PartitionNode node;
  node.labels = best_labels;
  node.caches.resize(static_cast<std::size_t>(*std::max_element(best_labels.begin(), best_labels.end()) + 1));
  res.solution = to_solution(node, ordered);
  res.objective = pooling_objective(res.solution, ordered, cfg, lambda);
  return res;
}

struct ExactRoutingResult {
  RoutingSolution solution;
  SearchObjective objective;
};

namespace detail {

inline bool is_integral(double x) { return std::abs(x - std::round(x)) < 1e-9; }

inline void require_integer_routing_data(const RoutingInstance& inst) {
  auto need = [](double x, const char* what) {
    if (!is_integral(x)) throw OracleRefusal(std::string("exact_routing: non-integer ") + what);
  };
  const auto& b = inst.battery;
  need(b.toc, "ToC");
  need(b.boc, "BoC");
  need(b.soc_min, "SoC_min");
  need(b.rate_slow, "slow rate");
  need(b.rate_fast, "fast rate");
  need(inst.config.delta, "ground time");
  const auto& net = inst.network;
  for (std::size_t i = 0; i < net.size(); ++i)
    for (std::size_t j = 0; j < net.size(); ++j) {
      if (net.fly_time[i][j]) need(*net.fly_time[i][j], "fly time");
      if (net.energy[i][j]) need(*net.energy[i][j], "leg energy");
    }
  for (const auto& r : inst.requests) need(r.depart_minute, "departure time");
  for (const auto& a : inst.fleet) need(a.start_minute, "start time");
}

/// Cheapest way (fewest fast sessions) to go from arrival SoC `e` to
/// departure SoC `e_dep` across one connection, with the plan realizing it.
struct ChargeOption {
  int n_fast = std::numeric_limits<int>::max();
  ChargePlan plan;
};

/// table[e][e_dep], integer SoC levels in [0, ToC].
inline std::vector<std::vector<ChargeOption>> charge_table(const Connection& c, const BatteryParams& bat) {
  const int toc = static_cast<int>(std::lround(bat.toc));
  const int g_dh = static_cast<int>(std::lround(c.deadhead_energy));
  const int g_sv = static_cast<int>(std::lround(c.service_energy));
  std::vector<std::vector<ChargeOption>> table(toc + 1, std::vector<ChargeOption>(toc + 1));
  constexpr double tol = 1e-9;
  for (int e = 0; e <= toc; ++e) {
    for (bool slow_a : {true, false}) {
      const double ra = bat.rate(slow_a);
      for (int ba = 0; e + ba <= toc; ++ba) {
        const double ta = ba / ra;
        if (ta > c.per_leg_cap + tol) break;
        if (!c.deadhead) {
          const int dep = e + ba;
          if (dep < bat.soc_min - tol || dep - g_sv < bat.boc - tol) continue;
          const int nf = ba > 0 && !slow_a ? 1 : 0;
          auto& cell = table[e][dep];
          if (nf < cell.n_fast) cell = {nf, ChargePlan{ta, 0.0, slow_a, slow_a}};
          continue;
        }
        const int takeoff = e + ba;
        if (takeoff < bat.soc_min - tol) continue;
        const int landed = takeoff - g_dh;
        if (landed < bat.boc - tol) continue;
        for (bool slow_b : {true, false}) {
          const double rb = bat.rate(slow_b);
          for (int bb = 0; landed + bb <= toc; ++bb) {
            const double tb = bb / rb;
            if (tb > c.per_leg_cap + tol || ta + tb > c.joint_cap + tol) break;
            const int dep = landed + bb;
            if (dep < bat.soc_min - tol || dep - g_sv < bat.boc - tol) continue;
            const int nf = (ba > 0 && !slow_a ? 1 : 0) + (bb > 0 && !slow_b ? 1 : 0);
            auto& cell = table[e][dep];
            if (nf < cell.n_fast) cell = {nf, ChargePlan{ta, tb, slow_a, slow_b}};
          }
        }
      }
    }
  }
  return table;
}

struct RouteChoice {
  bool feasible = false;
  int n_fast = 0;
  double money = 0.0;
  std::vector<Visit> route;
};

inline bool lex_less(int nf_a, double m_a, int nf_b, double m_b) {
  if (nf_a != nf_b) return nf_a < nf_b;
  return m_a < m_b - 1e-9;
}

}  // namespace detail

/// Lexicographic optimum on (unserved, fast sessions, money) with hard SoC
/// constraints, charging restricted to whole SoC units per slot.
inline ExactRoutingResult exact_routing(const RoutingInstance& inst, const OracleLimits& limits = {}) {
  check_instance(inst);
  const int n = static_cast<int>(inst.requests.size());
  const int fleet = static_cast<int>(inst.fleet.size());
  if (n > limits.max_requests)
    throw OracleRefusal("exact_routing: " + std::to_string(n) + " requests exceed the limit of " +
                        std::to_string(limits.max_requests));
  if (fleet > limits.max_aircraft)
    throw OracleRefusal("exact_routing: " + std::to_string(fleet) + " aircraft exceed the limit of " +
                        std::to_string(limits.max_aircraft));
  if (limits.require_integer_data) detail::require_integer_routing_data(inst);

  const RoutingModel model(inst);
  const auto& bat = inst.battery;
  const int toc = static_cast<int>(std::lround(bat.toc));

  // Charging tables per (previous row, next request), built on demand.
  std::map<std::pair<int, int>, std::vector<std::vector<detail::ChargeOption>>> tables;
  auto table_of = [&](int prev_row, int next) -> const auto& {
    auto it = tables.find({prev_row, next});
    if (it == tables.end())
      it = tables.emplace(std::pair{prev_row, next}, detail::charge_table(model.between(prev_row, next), bat)).first;
    return it->second;
  };

  std::vector<int> by_departure(n);
  std::iota(by_departure.begin(), by_departure.end(), 0);
  std::stable_sort(by_departure.begin(), by_departure.end(), [&](int a, int b) {
    return inst.requests[a].depart_minute < inst.requests[b].depart_minute;
  });

  auto best_route = [&](int aircraft, unsigned mask) {
    detail::RouteChoice out;
    std::vector<int> seq;
    for (int p : by_departure)
      if (mask & (1u << p)) seq.push_back(p);
    if (seq.empty()) {
      out.feasible = true;
      return out;
    }
    struct Cell {
      int n_fast = std::numeric_limits<int>::max();
      double money = 0.0;
      int from = -1;
    };
    std::vector<std::vector<Cell>> dp(seq.size(), std::vector<Cell>(toc + 1));
    int prev_row = n + aircraft;
    std::vector<Cell> prev_layer(toc + 1);
    prev_layer[toc] = {0, 0.0, -1};
    for (std::size_t k = 0; k < seq.size(); ++k) {
      const Connection& c = model.between(prev_row, seq[k]);
      if (!c.feasible) return out;
      const auto& table = table_of(prev_row, seq[k]);
      const int g_sv = static_cast<int>(std::lround(c.service_energy));
      const int g_dh = static_cast<int>(std::lround(c.deadhead_energy));
      for (int e = 0; e <= toc; ++e) {
        const Cell& from = prev_layer[e];
        if (from.n_fast == std::numeric_limits<int>::max()) continue;
        for (int dep = 0; dep <= toc; ++dep) {
          const auto& opt = table[e][dep];
          if (opt.n_fast == std::numeric_limits<int>::max()) continue;
          const int arr = dep - g_sv;
          const int nf = from.n_fast + opt.n_fast;
          const double money = from.money + c.cost + bat.price * (dep - e + g_dh);
          Cell& to = dp[k][arr];
          if (detail::lex_less(nf, money, to.n_fast, to.money)) to = {nf, money, e};
        }
      }
      prev_layer = dp[k];
      prev_row = seq[k];
    }
    int end = -1;
    for (int e = 0; e <= toc; ++e) {
      const Cell& c = prev_layer[e];
      if (c.n_fast == std::numeric_limits<int>::max()) continue;
      if (end < 0 || detail::lex_less(c.n_fast, c.money, prev_layer[end].n_fast, prev_layer[end].money)) end = e;
    }
    if (end < 0) return out;
    out.feasible = true;
    out.n_fast = prev_layer[end].n_fast;
    out.money = prev_layer[end].money;
    out.route.resize(seq.size());
    int arr = end;
    for (int k = static_cast<int>(seq.size()) - 1; k >= 0; --k) {
      const int e = dp[k][arr].from;
      const int row = k == 0 ? n + aircraft : seq[k - 1];
      const int g_sv = static_cast<int>(std::lround(model.between(row, seq[k]).service_energy));
      out.route[k] = Visit{inst.requests[seq[k]].id, table_of(row, seq[k])[e][arr + g_sv].plan};
      arr = e;
    }
    return out;
  };

  const unsigned full = (1u << n) - 1u;
  std::vector<std::map<unsigned, detail::RouteChoice>> routes(fleet);
  auto route_of = [&](int a, unsigned mask) -> const detail::RouteChoice& {
    auto it = routes[a].find(mask);
    if (it == routes[a].end()) it = routes[a].emplace(mask, best_route(a, mask)).first;
    return it->second;
  };

  struct Best {
    int n_u = std::numeric_limits<int>::max();
    int n_fast = 0;
    double money = 0.0;
    std::vector<unsigned> masks;
  } best;
  std::vector<unsigned> masks(fleet);
  auto assign = [&](auto&& self, int a, unsigned remaining, int nf, double money) -> void {
    if (a == fleet) {
      const int n_u = std::popcount(remaining);
      if (n_u < best.n_u || (n_u == best.n_u && detail::lex_less(nf, money, best.n_fast, best.money)))
        best = {n_u, nf, money, masks};
      return;
    }
    for (unsigned sub = remaining;; sub = (sub - 1) & remaining) {
      const auto& r = route_of(a, sub);
      if (r.feasible) {
        masks[a] = sub;
        self(self, a + 1, remaining & ~sub, nf + r.n_fast, money + r.money);
      }
      if (sub == 0) break;
    }
  };
  assign(assign, 0, full, 0, 0.0);

  ExactRoutingResult res;
  res.solution.routes.resize(fleet);
  unsigned served = 0;
  for (int a = 0; a < fleet; ++a) {
    res.solution.routes[a] = route_of(a, best.masks[a]).route;
    served |= best.masks[a];
  }
  for (int p = 0; p < n; ++p)
    if (!(served & (1u << p))) res.solution.unserved.push_back(inst.requests[p].id);
  std::sort(res.solution.unserved.begin(), res.solution.unserved.end());
  res.objective = evaluate(model, res.solution, 0.0);
  return res;
}

/// Largest number of requests that can be served when charging is ignored:
/// a maximum matching giving each served request a distinct predecessor
/// (another request or an aircraft start) it can be reached from in time.
/// Serving everything requires this to equal the request count.
inline int timing_relaxation_bound(const RoutingModel& model) {
  const int n = static_cast<int>(model.request_count());
  const int preds = n + static_cast<int>(model.fleet_size());
  std::vector<int> owner(static_cast<std::size_t>(preds), -1);
  std::vector<char> seen;
  std::function<bool(int)> augment = [&](int q) {
    for (int p = 0; p < preds; ++p) {
      if (p == q || seen[p] || !model.between(p, q).feasible) continue;
      seen[p] = 1;
      if (owner[p] == -1 || augment(owner[p])) {
        owner[p] = q;
        return true;
      }
    }
    return false;
  };
  int matched = 0;
  for (int q = 0; q < n; ++q) {
    seen.assign(static_cast<std::size_t>(preds), 0);
    if (augment(q)) ++matched;
  }
  return matched;
}

}  // namespace uam
