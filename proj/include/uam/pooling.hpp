#pragma once

// Beam search over set partitions of one origin-destination demand set.
//
// Demands are inserted one at a time in ascending id order. A tree level d
// holds partitions of the first d+1 demands; a child either joins the new
// demand to an existing group or opens a singleton. Children that break a
// group constraint are dropped immediately, and only the W cheapest children
// (under the objective restricted to inserted demands) survive a level.

#include <algorithm>
#include <numeric>
#include <span>
#include <unordered_map>
#include <vector>

#include "uam/core.hpp"

namespace uam {

/// Summary of one group that makes member insertion an O(1) check.
struct GroupCache {
  double max_quantile = -std::numeric_limits<double>::infinity();
  double min_deadline = std::numeric_limits<double>::infinity();
  double min_wait_limit = std::numeric_limits<double>::infinity();  // min(mean + t_class)
  int passengers = 0;
  double alpha_sum = 0.0;

  bool operator==(const GroupCache&) const = default;
};

/// A partition of the first `labels.size()` inserted demands, stored as a
/// restricted growth string: labels[i] is the group of the i-th inserted
/// demand, groups numbered by first appearance.
struct PartitionNode {
  std::vector<int> labels;
  std::vector<GroupCache> caches;
  double score = 0.0;

  [[nodiscard]] std::size_t group_count() const { return caches.size(); }

  /// Groups as lists of insertion positions, ordered by smallest member.
  [[nodiscard]] std::vector<std::vector<int>> groups() const {
    int n = 0;
    for (int l : labels) n = std::max(n, l + 1);
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]].push_back(static_cast<int>(i));
    return out;
  }

  bool operator==(const PartitionNode&) const = default;
};

struct BeamState {
  int level = -1;  // position of the last inserted demand
  double lambda_p = 0.0;
  std::vector<PartitionNode> frontier;

  bool operator==(const BeamState&) const = default;
};

namespace detail {

inline double group_open_cost(const Demand& d, const PoolingConfig& cfg, double lambda_p) {
  return lambda_p + d.arrival.quantile_offset * cfg.alpha(d.cls);
}

inline GroupCache singleton_cache(const Demand& d, const PoolingConfig& cfg) {
  GroupCache g;
  g.max_quantile = d.arrival.quantile();
  g.min_deadline = d.latest_departure.value_or(std::numeric_limits<double>::infinity());
  g.min_wait_limit = d.arrival.mean_minute + cfg.max_wait(d.cls);
  g.passengers = d.passengers;
  g.alpha_sum = cfg.alpha(d.cls);
  return g;
}

/// Cost increase of adding `d` to group `g`, or nullopt when the merged
/// group breaks capacity, a deadline, or a class wait limit.
inline std::optional<double> join_delta(const GroupCache& g, const Demand& d,
                                        const PoolingConfig& cfg) {
  if (g.passengers + d.passengers > cfg.capacity) return std::nullopt;
  const double q = d.arrival.quantile();
  const double f = std::max(g.max_quantile, q);
  const double deadline = std::min(g.min_deadline, d.latest_departure.value_or(f));
  if (f > deadline + kTimeEps) return std::nullopt;
  const double wait_limit = std::min(g.min_wait_limit, d.arrival.mean_minute + cfg.max_wait(d.cls));
  if (f > wait_limit + kTimeEps) return std::nullopt;
  return (f - g.max_quantile) * g.alpha_sum + (f - d.arrival.mean_minute) * cfg.alpha(d.cls);
}

inline GroupCache joined(GroupCache g, const Demand& d, const PoolingConfig& cfg) {
  g.max_quantile = std::max(g.max_quantile, d.arrival.quantile());
  if (d.latest_departure) g.min_deadline = std::min(g.min_deadline, *d.latest_departure);
  g.min_wait_limit = std::min(g.min_wait_limit, d.arrival.mean_minute + cfg.max_wait(d.cls));
  g.passengers += d.passengers;
  g.alpha_sum += cfg.alpha(d.cls);
  return g;
}

/// Deterministic total order on nodes: score, then restricted growth string.
inline bool node_less(const PartitionNode& a, const PartitionNode& b) {
  if (a.score != b.score) return a.score < b.score;
  return a.labels < b.labels;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Group-level operations
// ---------------------------------------------------------------------------

/// Demands looked up by id.
class DemandIndex {
public:
  explicit DemandIndex(std::span<const Demand> demands) : demands_(demands) {
    for (std::size_t i = 0; i < demands.size(); ++i) {
      if (!pos_.emplace(demands[i].id, i).second)
        throw InvalidInput("duplicate demand id " + std::to_string(demands[i].id));
    }
  }
  [[nodiscard]] const Demand& at(int id) const {
    auto it = pos_.find(id);
    if (it == pos_.end()) throw InvalidInput("unknown demand id " + std::to_string(id));
    return demands_[it->second];
  }
  [[nodiscard]] bool contains(int id) const { return pos_.count(id) != 0; }

private:
  std::span<const Demand> demands_;
  std::unordered_map<int, std::size_t> pos_;
};

/// Departure of a group: the latest boarding quantile among its members.
inline double group_departure(std::span<const int> group, std::span<const Demand> demands) {
  if (group.empty()) throw InvalidInput("group_departure: empty group");
  DemandIndex index(demands);
  double f = -std::numeric_limits<double>::infinity();
  for (int id : group) f = std::max(f, index.at(id).arrival.quantile());
  return f;
}

inline bool group_feasible(std::span<const int> group, std::span<const Demand> demands,
                           const PoolingConfig& cfg) {
  if (group.empty()) throw InvalidInput("group_feasible: empty group");
  DemandIndex index(demands);
  const double f = group_departure(group, demands);
  int pax = 0;
  for (int id : group) {
    const Demand& d = index.at(id);
    pax += d.passengers;
    if (d.latest_departure && f > *d.latest_departure + kTimeEps) return false;
    if (f - d.arrival.mean_minute > cfg.max_wait(d.cls) + kTimeEps) return false;
  }
  return pax <= cfg.capacity;
}

/// Objective of a (possibly partial) partition recomputed from its labels:
/// one lambda_p per group plus class-weighted expected waits. `ordered`
/// holds the demands in insertion order.
inline double truncated_objective(const PartitionNode& node, std::span<const Demand> ordered,
                                  const PoolingConfig& cfg, double lambda_p) {
  const auto groups = node.groups();
  double total = 0.0;
  for (const auto& g : groups) {
    double f = -std::numeric_limits<double>::infinity();
    for (int p : g) f = std::max(f, ordered[p].arrival.quantile());
    total += lambda_p;
    for (int p : g) total += (f - ordered[p].arrival.mean_minute) * cfg.alpha(ordered[p].cls);
  }
  return total;
}

/// Objective of a complete pooling solution, departures deduced from members.
inline double pooling_objective(const PoolingSolution& sol, std::span<const Demand> demands,
                                const PoolingConfig& cfg, double lambda_p) {
  DemandIndex index(demands);
  double total = 0.0;
  for (const auto& g : sol.groups) {
    const double f = group_departure(g, demands);
    total += lambda_p;
    for (int id : g) {
      const Demand& d = index.at(id);
      total += (f - d.arrival.mean_minute) * cfg.alpha(d.cls);
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Beam search
// ---------------------------------------------------------------------------

/// Demands sorted by id: the insertion order of the search tree.
inline std::vector<Demand> insertion_order(std::span<const Demand> demands) {
  std::vector<Demand> out(demands.begin(), demands.end());
  std::stable_sort(out.begin(), out.end(), [](const Demand& a, const Demand& b) { return a.id < b.id; });
  return out;
}

/// All conflict-free children of `frontier` after inserting the demand at
/// position level+1 of `ordered`. Per parent: one child per joinable group,
/// then the singleton child.
inline std::vector<PartitionNode> extend_prune(std::span<const PartitionNode> frontier,
                                               const Demand& next, const PoolingConfig& cfg,
                                               double lambda_p) {
  std::vector<PartitionNode> children;
  for (const auto& parent : frontier) {
    for (std::size_t g = 0; g < parent.caches.size(); ++g) {
      auto delta = detail::join_delta(parent.caches[g], next, cfg);
      if (!delta) continue;
      PartitionNode child = parent;
      child.labels.push_back(static_cast<int>(g));
      child.caches[g] = detail::joined(child.caches[g], next, cfg);
      child.score = parent.score + *delta;
      children.push_back(std::move(child));
    }
    PartitionNode child = parent;
    child.labels.push_back(static_cast<int>(parent.caches.size()));
    child.caches.push_back(detail::singleton_cache(next, cfg));
    child.score = parent.score + detail::group_open_cost(next, cfg, lambda_p);
    children.push_back(std::move(child));
  }
  return children;
}

/// The `width` best children in ascending score; ties go to the smaller
/// restricted growth string.
inline std::vector<PartitionNode> retrieve_best(std::vector<PartitionNode> children, int width) {
  if (children.empty())
    throw std::logic_error("retrieve_best: no children (singleton child always exists)");
  const auto keep = std::min<std::size_t>(children.size(), static_cast<std::size_t>(width));
  std::partial_sort(children.begin(), children.begin() + static_cast<std::ptrdiff_t>(keep),
                    children.end(), detail::node_less);
  children.resize(keep);
  return children;
}

/// Root of the tree: the first demand alone.
inline BeamState start_beam(const Demand& first, const PoolingConfig& cfg, double lambda_p) {
  check_demand(first, cfg);
  BeamState s;
  s.level = 0;
  s.lambda_p = lambda_p;
  PartitionNode root;
  root.labels = {0};
  root.caches = {detail::singleton_cache(first, cfg)};
  root.score = detail::group_open_cost(first, cfg, lambda_p);
  s.frontier.push_back(std::move(root));
  return s;
}

/// One tree level: insert `next` (position level+1) into every frontier node
/// and keep the best `beam_width` children. Equivalent to extend_prune
/// followed by retrieve_best, without materializing discarded children.
inline BeamState extend_incremental(const BeamState& state, const Demand& next,
                                    const PoolingConfig& cfg) {
  check_demand(next, cfg);
  if (state.frontier.empty()) throw std::logic_error("extend_incremental: empty frontier");

  struct Candidate {
    double score;
    int parent;
    int label;
  };
  std::vector<Candidate> cands;
  for (std::size_t p = 0; p < state.frontier.size(); ++p) {
    const auto& parent = state.frontier[p];
    for (std::size_t g = 0; g < parent.caches.size(); ++g) {
      if (auto delta = detail::join_delta(parent.caches[g], next, cfg))
        cands.push_back({parent.score + *delta, static_cast<int>(p), static_cast<int>(g)});
    }
    cands.push_back({parent.score + detail::group_open_cost(next, cfg, state.lambda_p),
                     static_cast<int>(p), static_cast<int>(parent.caches.size())});
  }

  // Child label strings are parent string + label, and distinct parents
  // hold distinct strings, so comparing (parent string, label) reproduces
  // the restricted-growth-string order of the children.
  const auto less = [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.parent != b.parent)
      return state.frontier[a.parent].labels < state.frontier[b.parent].labels;
    return a.label < b.label;
  };
  const auto keep = std::min<std::size_t>(cands.size(), static_cast<std::size_t>(cfg.beam_width));
  if (keep < cands.size()) {
    std::nth_element(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(), less);
    cands.resize(keep);
  }
  std::sort(cands.begin(), cands.end(), less);

  BeamState out;
  out.level = state.level + 1;
  out.lambda_p = state.lambda_p;
  out.frontier.reserve(cands.size());
  for (const auto& c : cands) {
    const auto& parent = state.frontier[c.parent];
    PartitionNode child;
    child.labels.reserve(parent.labels.size() + 1);
    child.labels = parent.labels;
    child.labels.push_back(c.label);
    child.caches = parent.caches;
    if (static_cast<std::size_t>(c.label) == parent.caches.size())
      child.caches.push_back(detail::singleton_cache(next, cfg));
    else
      child.caches[c.label] = detail::joined(child.caches[c.label], next, cfg);
    child.score = c.score;
    out.frontier.push_back(std::move(child));
  }
  return out;
}

/// Beam state holding all of `ordered` (demands already in insertion order).
inline BeamState run_beam(std::span<const Demand> ordered, const PoolingConfig& cfg,
                          double lambda_p) {
  if (ordered.empty()) throw InvalidInput("beam search needs at least one demand");
  BeamState s = start_beam(ordered[0], cfg, lambda_p);
  for (std::size_t d = 1; d < ordered.size(); ++d) s = extend_incremental(s, ordered[d], cfg);
  return s;
}

/// Converts a node over `ordered` into a solution with demand ids and
/// deduced departures.
inline PoolingSolution to_solution(const PartitionNode& node, std::span<const Demand> ordered) {
  PoolingSolution sol;
  for (const auto& g : node.groups()) {
    std::vector<int> ids;
    double f = -std::numeric_limits<double>::infinity();
    for (int p : g) {
      ids.push_back(ordered[p].id);
      f = std::max(f, ordered[p].arrival.quantile());
    }
    sol.groups.push_back(std::move(ids));
    sol.departures.push_back(f);
  }
  return sol;
}

struct BeamResult {
  PoolingSolution solution;
  double objective = 0.0;
  double lambda_p = 0.0;
};

inline BeamResult beam_search(std::span<const Demand> demands, const PoolingConfig& cfg) {
  cfg.check();
  const auto ordered = insertion_order(demands);
  const double lambda = cfg.resolved_lambda(ordered.size());
  const BeamState s = run_beam(ordered, cfg, lambda);
  const auto& best = s.frontier.front();
  return {to_solution(best, ordered), best.score, lambda};
}

/// One flight request per group. Ids are assigned from `first_id` upward.
inline std::vector<FlightRequest> to_requests(const PoolingSolution& sol,
                                              std::span<const Demand> demands, int origin,
                                              int destination, const Network& net,
                                              double value_per_passenger, int first_id = 0) {
  if (!net.has_leg(origin, destination))
    throw InvalidInput("to_requests: leg " + std::to_string(origin) + "->" +
                       std::to_string(destination) + " not bookable");
  const double fly = *net.fly(origin, destination);
  DemandIndex index(demands);
  std::vector<FlightRequest> out;
  for (std::size_t k = 0; k < sol.groups.size(); ++k) {
    int pax = 0;
    for (int id : sol.groups[k]) pax += index.at(id).passengers;
    FlightRequest r;
    r.id = first_id + static_cast<int>(k);
    r.origin = origin;
    r.destination = destination;
    r.depart_minute = sol.departures[k];
    r.arrive_minute = sol.departures[k] + fly;
    r.passengers = pax;
    r.value = value_per_passenger * pax;
    out.push_back(r);
  }
  return out;
}

}  // namespace uam
