#pragma once

// Variable neighborhood search for routing and recharging.
//
// Four neighborhoods act on a RoutingSolution: shift one request to another
// aircraft or to the unserved pool (N1), swap two requests between aircraft
// (N2), re-optimize one charging slot (N3), exchange whole routes between
// aircraft (N4). Shaking draws from N1/N2, descent cycles N1..N4 with best
// improvement, and the takeoff-SoC violation is priced by an adaptive
// penalty.

#include <chrono>
#include <deque>
#include <functional>
#include <random>

#include "uam/routing_model.hpp"

namespace uam {

// ---------------------------------------------------------------------------
// Adaptive penalty
// ---------------------------------------------------------------------------

struct PenaltyState {
  double lambda = 0.0;
  long iteration = 0;
  std::deque<bool> recent;  // validity of the last visited solutions, newest last
};

/// Records one visited solution. Every `update_period` iterations the
/// penalty is divided by beta_decr if the last `validity_streak` visited
/// solutions were all valid, otherwise increased by beta_incr.
inline PenaltyState update_penalty(PenaltyState s, bool valid, const VnsParams& p) {
  s.recent.push_back(valid);
  while (s.recent.size() > static_cast<std::size_t>(p.validity_streak)) s.recent.pop_front();
  ++s.iteration;
  if (s.iteration % p.update_period == 0) {
    const bool streak = s.recent.size() == static_cast<std::size_t>(p.validity_streak) &&
                        std::all_of(s.recent.begin(), s.recent.end(), [](bool b) { return b; });
    if (streak)
      s.lambda /= p.beta_decr;
    else
      s.lambda += p.beta_incr;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Moves
// ---------------------------------------------------------------------------

enum class Neighborhood { Shift = 1, Swap = 2, Recharge = 3, Rotate = 4 };

/// Charging slot of one connection. A connection without deadhead has a
/// single ground stop, so its two durations are driven together (Tied).
enum class ChargeSlot { Tied, After, Before };

inline constexpr int kUnserved = -1;

struct Move {
  Neighborhood kind = Neighborhood::Shift;
  int request = -1;  // shift: moved request; swap: request leaving `from`
  int other = -1;    // swap: request leaving `to`
  int from = kUnserved;
  int to = kUnserved;
  int position = -1;  // recharge: visit index on `from`
  ChargeSlot slot = ChargeSlot::Tied;
  bool slow = true;
  double duration = 0.0;
};

namespace detail {

inline void reset_plan(std::vector<Visit>& route, std::size_t k) {
  if (k < route.size()) route[k].plan = ChargePlan{};
}

inline void erase_request(std::vector<Visit>& route, int request) {
  auto it = std::find_if(route.begin(), route.end(), [&](const Visit& v) { return v.request == request; });
  if (it == route.end()) throw std::logic_error("request not on route");
  const auto k = static_cast<std::size_t>(it - route.begin());
  route.erase(it);
  reset_plan(route, k);
}

inline void insert_by_departure(const RoutingModel& model, std::vector<Visit>& route, int request) {
  const double t = model.request(request).depart_minute;
  auto it = std::upper_bound(route.begin(), route.end(), t, [&](double x, const Visit& v) {
    return x < model.request(v.request).depart_minute;
  });
  const auto k = static_cast<std::size_t>(it - route.begin());
  route.insert(it, Visit{request, ChargePlan{}});
  reset_plan(route, k + 1);
}

inline bool time_feasible(const RoutingModel& model, std::size_t aircraft, std::span<const Visit> route) {
  for (std::size_t k = 0; k < route.size(); ++k)
    if (!model.entering(aircraft, route, k).feasible) return false;
  return true;
}

/// Drops leading requests that aircraft `aircraft` cannot reach from its start.
inline std::vector<int> drop_unreachable_head(const RoutingModel& model, std::size_t aircraft,
                                              std::vector<Visit>& route) {
  std::vector<int> dropped;
  while (!route.empty() && !model.entering(aircraft, route, 0).feasible) {
    dropped.push_back(route.front().request);
    route.erase(route.begin());
  }
  reset_plan(route, 0);
  return dropped;
}

inline void insert_sorted(std::vector<int>& ids, int id) {
  ids.insert(std::upper_bound(ids.begin(), ids.end(), id), id);
}

inline void erase_sorted(std::vector<int>& ids, int id) {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) throw std::logic_error("request not unserved");
  ids.erase(it);
}

}  // namespace detail

/// Routes touched by a move, rebuilt, plus the unserved-set change.
struct MoveResult {
  std::vector<std::pair<int, std::vector<Visit>>> routes;
  std::vector<int> became_unserved;
  std::vector<int> became_served;
  bool feasible = true;
};

inline MoveResult rebuild(const RoutingModel& model, const RoutingSolution& sol, const Move& m) {
  MoveResult out;
  switch (m.kind) {
    case Neighborhood::Shift: {
      if (m.from != kUnserved) {
        auto r = sol.routes[m.from];
        detail::erase_request(r, m.request);
        out.routes.emplace_back(m.from, std::move(r));
      } else {
        out.became_served.push_back(m.request);
      }
      if (m.to != kUnserved) {
        auto r = sol.routes[m.to];
        detail::insert_by_departure(model, r, m.request);
        out.routes.emplace_back(m.to, std::move(r));
      } else {
        out.became_unserved.push_back(m.request);
      }
      break;
    }
    case Neighborhood::Swap: {
      auto a = sol.routes[m.from];
      auto b = sol.routes[m.to];
      detail::erase_request(a, m.request);
      detail::erase_request(b, m.other);
      detail::insert_by_departure(model, a, m.other);
      detail::insert_by_departure(model, b, m.request);
      out.routes.emplace_back(m.from, std::move(a));
      out.routes.emplace_back(m.to, std::move(b));
      break;
    }
    case Neighborhood::Rotate: {
      auto a = sol.routes[m.to];
      auto b = sol.routes[m.from];
      for (int id : detail::drop_unreachable_head(model, m.from, a)) out.became_unserved.push_back(id);
      for (int id : detail::drop_unreachable_head(model, m.to, b)) out.became_unserved.push_back(id);
      out.routes.emplace_back(m.from, std::move(a));
      out.routes.emplace_back(m.to, std::move(b));
      break;
    }
    case Neighborhood::Recharge: {
      auto r = sol.routes[m.from];
      auto& p = r.at(m.position).plan;
      switch (m.slot) {
        case ChargeSlot::Tied:
          p.duration_after = m.duration;
          p.duration_before = 0.0;
          p.slow_after = p.slow_before = m.slow;
          break;
        case ChargeSlot::After:
          p.duration_after = m.duration;
          p.slow_after = m.slow;
          break;
        case ChargeSlot::Before:
          p.duration_before = m.duration;
          p.slow_before = m.slow;
          break;
      }
      out.routes.emplace_back(m.from, std::move(r));
      break;
    }
  }
  for (const auto& [a, r] : out.routes)
    if (!detail::time_feasible(model, static_cast<std::size_t>(a), r)) out.feasible = false;
  return out;
}

inline RoutingSolution apply_move(const RoutingModel& model, const RoutingSolution& sol, const Move& m) {
  auto res = rebuild(model, sol, m);
  RoutingSolution next = sol;
  for (auto& [a, r] : res.routes) next.routes[a] = std::move(r);
  for (int id : res.became_served) detail::erase_sorted(next.unserved, id);
  for (int id : res.became_unserved) detail::insert_sorted(next.unserved, id);
  return next;
}

// ---------------------------------------------------------------------------
// Move generation
// ---------------------------------------------------------------------------

namespace detail {

inline bool insertable(const RoutingModel& model, std::size_t aircraft, std::span<const Visit> route,
                       int request) {
  const int pos = model.position(request);
  const double t = model.request(request).depart_minute;
  std::size_t k = 0;
  while (k < route.size() && model.request(route[k].request).depart_minute <= t) ++k;
  const Connection& in = k == 0 ? model.from_start(aircraft, pos)
                                : model.between(model.position(route[k - 1].request), pos);
  if (!in.feasible) return false;
  return k == route.size() || model.between(pos, model.position(route[k].request)).feasible;
}

inline bool removable(const RoutingModel& model, std::size_t aircraft, std::span<const Visit> route,
                      std::size_t k) {
  if (k + 1 >= route.size()) return true;
  const int next = model.position(route[k + 1].request);
  const Connection& c = k == 0 ? model.from_start(aircraft, next)
                               : model.between(model.position(route[k - 1].request), next);
  return c.feasible;
}

}  // namespace detail

/// N1: every served request to each other aircraft or to unserved; every
/// unserved request to each aircraft. Time-infeasible results are skipped.
inline std::vector<Move> shift_moves(const RoutingModel& model, const RoutingSolution& sol) {
  std::vector<Move> moves;
  const auto fleet = sol.routes.size();
  for (std::size_t a = 0; a < fleet; ++a) {
    const auto& route = sol.routes[a];
    for (std::size_t k = 0; k < route.size(); ++k) {
      if (!detail::removable(model, a, route, k)) continue;
      const int rid = route[k].request;
      for (std::size_t b = 0; b < fleet; ++b) {
        if (b == a || !detail::insertable(model, b, sol.routes[b], rid)) continue;
        moves.push_back({Neighborhood::Shift, rid, -1, static_cast<int>(a), static_cast<int>(b)});
      }
      moves.push_back({Neighborhood::Shift, rid, -1, static_cast<int>(a), kUnserved});
    }
  }
  for (int rid : sol.unserved)
    for (std::size_t b = 0; b < fleet; ++b)
      if (detail::insertable(model, b, sol.routes[b], rid))
        moves.push_back({Neighborhood::Shift, rid, -1, kUnserved, static_cast<int>(b)});
  return moves;
}

/// N2: exchange two requests served by different aircraft.
inline std::vector<Move> swap_moves(const RoutingModel& model, const RoutingSolution& sol) {
  std::vector<Move> moves;
  const auto fleet = sol.routes.size();
  for (std::size_t a = 0; a < fleet; ++a)
    for (std::size_t b = a + 1; b < fleet; ++b)
      for (const auto& va : sol.routes[a])
        for (const auto& vb : sol.routes[b]) {
          Move m{Neighborhood::Swap, va.request, vb.request, static_cast<int>(a), static_cast<int>(b)};
          if (rebuild(model, sol, m).feasible) moves.push_back(m);
        }
  return moves;
}

/// N4: exchange the full routes of two aircraft.
inline std::vector<Move> rotate_moves(const RoutingSolution& sol) {
  std::vector<Move> moves;
  const auto fleet = sol.routes.size();
  for (std::size_t a = 0; a < fleet; ++a)
    for (std::size_t b = a + 1; b < fleet; ++b) {
      if (sol.routes[a].empty() && sol.routes[b].empty()) continue;
      Move m;
      m.kind = Neighborhood::Rotate;
      m.from = static_cast<int>(a);
      m.to = static_cast<int>(b);
      moves.push_back(m);
    }
  return moves;
}

/// Minimizes `f` over [0, hi] by golden-section search down to an interval
/// of width `tol`, then compares the bracket with the end points and the
/// extra candidates. Ties go to the shorter duration.
template <typename F>
std::pair<double, double> golden_section_min(F&& f, double hi, double tol,
                                             std::span<const double> extra = {}) {
  constexpr double inv_phi = 0.6180339887498949;
  double best_x = 0.0, best_f = f(0.0);
  auto consider = [&](double x) {
    x = std::clamp(x, 0.0, hi);
    const double fx = f(x);
    if (fx < best_f || (fx == best_f && x < best_x)) {
      best_f = fx;
      best_x = x;
    }
  };
  if (hi <= 0.0) return {best_x, best_f};
  double a = 0.0, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  consider(a);
  consider(b);
  consider(0.5 * (a + b));
  consider(hi);
  for (double x : extra) consider(x);
  return {best_x, best_f};
}

inline constexpr double kGoldenTolerance = 0.25;

/// N3: for every charging slot, the best (mode, duration) found by golden
/// section over the slot's available time, one move per slot.
inline std::vector<Move> recharge_moves(const RoutingModel& model, const RoutingSolution& sol,
                                        double lambda) {
  const auto& inst = model.instance();
  const auto& bat = inst.battery;
  std::vector<Move> moves;
  for (std::size_t a = 0; a < sol.routes.size(); ++a) {
    const auto& route = sol.routes[a];
    if (route.empty()) continue;
    std::vector<SoCPoint> trace;
    model.simulate(a, route, &trace);
    auto work = route;
    for (std::size_t k = 0; k < route.size(); ++k) {
      const Connection& c = model.entering(a, route, k);
      if (!c.feasible) continue;
      const ChargePlan base = route[k].plan;
      const double e_prev = k == 0 ? bat.toc : trace[k - 1].e_arrive;

      std::vector<ChargeSlot> slots;
      if (c.deadhead)
        slots = {ChargeSlot::After, ChargeSlot::Before};
      else
        slots = {ChargeSlot::Tied};

      for (ChargeSlot slot : slots) {
        double hi = 0.0, e_slot = e_prev;
        switch (slot) {
          case ChargeSlot::Tied: hi = c.joint_cap; break;
          case ChargeSlot::After: hi = std::min(c.per_leg_cap, c.joint_cap - base.duration_before); break;
          case ChargeSlot::Before:
            hi = std::min(c.per_leg_cap, c.joint_cap - base.duration_after);
            e_slot = e_prev + trace[k].bought_after - c.deadhead_energy;
            break;
        }
        if (hi <= 0.0) continue;

        Move best;
        double best_f = std::numeric_limits<double>::infinity();
        for (bool slow : {true, false}) {
          const double rate = bat.rate(slow);
          auto objective = [&](double x) {
            auto& p = work[k].plan;
            p = base;
            switch (slot) {
              case ChargeSlot::Tied:
                p.duration_after = x;
                p.duration_before = 0.0;
                p.slow_after = p.slow_before = slow;
                break;
              case ChargeSlot::After: p.duration_after = x; p.slow_after = slow; break;
              case ChargeSlot::Before: p.duration_before = x; p.slow_before = slow; break;
            }
            return model.simulate(a, work).penalized(inst.config.alpha_f, bat.price, lambda);
          };
          // Durations buying whole SoC units, and the duration filling up
          // to ToC: the breakpoints of the piecewise-linear objective on
          // integral data.
          std::vector<double> extra{(bat.toc - e_slot) / rate};
          auto [x, fx] = golden_section_min(objective, hi, kGoldenTolerance, extra);
          for (double y : {std::floor(x * rate), std::ceil(x * rate), std::floor(x * rate) - 1.0,
                           std::ceil(x * rate) + 1.0}) {
            const double cand = std::clamp(y / rate, 0.0, hi);
            const double fy = objective(cand);
            if (fy < fx || (fy == fx && cand < x)) {
              x = cand;
              fx = fy;
            }
          }
          if (std::min(bat.toc - e_slot, x * rate) < kBoughtEps) {
            x = 0.0;
            fx = objective(0.0);
          }
          if (fx < best_f || (fx == best_f && x == 0.0 && best.duration > 0.0)) {
            best_f = fx;
            best.kind = Neighborhood::Recharge;
            best.from = static_cast<int>(a);
            best.position = static_cast<int>(k);
            best.slot = slot;
            best.slow = x == 0.0 ? true : slow;
            best.duration = x;
          }
        }
        work[k].plan = base;
        moves.push_back(best);
      }
    }
  }
  return moves;
}

inline std::vector<Move> moves_of(Neighborhood n, const RoutingModel& model,
                                  const RoutingSolution& sol, double lambda) {
  switch (n) {
    case Neighborhood::Shift: return shift_moves(model, sol);
    case Neighborhood::Swap: return swap_moves(model, sol);
    case Neighborhood::Recharge: return recharge_moves(model, sol, lambda);
    case Neighborhood::Rotate: return rotate_moves(sol);
  }
  return {};
}

/// Materialized neighbors, for inspection and testing.
inline std::vector<RoutingSolution> neighbors(Neighborhood n, const RoutingModel& model,
                                              const RoutingSolution& sol, double lambda = 0.0) {
  std::vector<RoutingSolution> out;
  for (const auto& m : moves_of(n, model, sol, lambda)) out.push_back(apply_move(model, sol, m));
  return out;
}

inline std::vector<RoutingSolution> neighborhood_shift(const RoutingSolution& sol, const RoutingModel& model) {
  return neighbors(Neighborhood::Shift, model, sol);
}
inline std::vector<RoutingSolution> neighborhood_swap(const RoutingSolution& sol, const RoutingModel& model) {
  return neighbors(Neighborhood::Swap, model, sol);
}
inline std::vector<RoutingSolution> neighborhood_recharge(const RoutingSolution& sol,
                                                          const RoutingModel& model, double lambda) {
  return neighbors(Neighborhood::Recharge, model, sol, lambda);
}
inline std::vector<RoutingSolution> neighborhood_rotate(const RoutingSolution& sol, const RoutingModel& model) {
  return neighbors(Neighborhood::Rotate, model, sol);
}

// ---------------------------------------------------------------------------
// Descent and search
// ---------------------------------------------------------------------------

/// Solution plus cached per-route evaluations.
class SearchPoint {
public:
  SearchPoint(const RoutingModel& model, RoutingSolution sol) : model_(&model), sol_(std::move(sol)) {
    check_coherent(model, sol_);
    evals_.reserve(sol_.routes.size());
    for (std::size_t a = 0; a < sol_.routes.size(); ++a) evals_.push_back(model.simulate(a, sol_.routes[a]));
  }

  [[nodiscard]] const RoutingSolution& solution() const { return sol_; }
  [[nodiscard]] const std::vector<RouteEval>& evals() const { return evals_; }

  [[nodiscard]] double violation() const {
    double v = 0.0;
    for (const auto& e : evals_) v += e.violation;
    return v;
  }
  [[nodiscard]] bool valid() const { return violation() <= 1e-9; }

  [[nodiscard]] double penalized(double lambda) const {
    const auto& inst = model_->instance();
    double f = static_cast<double>(sol_.unserved.size()) * inst.config.alpha_u;
    for (const auto& e : evals_) f += e.penalized(inst.config.alpha_f, inst.battery.price, lambda);
    return f;
  }

  [[nodiscard]] SearchObjective objective(double lambda) const {
    const auto& inst = model_->instance();
    SearchObjective o;
    o.n_unserved = static_cast<int>(sol_.unserved.size());
    for (const auto& e : evals_) {
      o.n_fast += e.n_fast;
      o.monetary += e.connection_cost + e.bought * inst.battery.price;
      o.violation += e.violation;
    }
    o.scalar = penalized(lambda);
    return o;
  }

  /// Change of the penalized objective if `m` were applied; nullopt when
  /// the result is not time-feasible.
  [[nodiscard]] std::optional<double> delta(const Move& m, double lambda) const {
    const auto res = rebuild(*model_, sol_, m);
    if (!res.feasible) return std::nullopt;
    const auto& inst = model_->instance();
    double d = inst.config.alpha_u *
               (static_cast<double>(res.became_unserved.size()) - static_cast<double>(res.became_served.size()));
    for (const auto& [a, r] : res.routes) {
      const auto ev = model_->simulate(static_cast<std::size_t>(a), r);
      d += ev.penalized(inst.config.alpha_f, inst.battery.price, lambda) -
           evals_[a].penalized(inst.config.alpha_f, inst.battery.price, lambda);
    }
    return d;
  }

  void apply(const Move& m) {
    auto res = rebuild(*model_, sol_, m);
    for (auto& [a, r] : res.routes) {
      sol_.routes[a] = std::move(r);
      evals_[a] = model_->simulate(static_cast<std::size_t>(a), sol_.routes[a]);
    }
    for (int id : res.became_served) detail::erase_sorted(sol_.unserved, id);
    for (int id : res.became_unserved) detail::insert_sorted(sol_.unserved, id);
  }

private:
  const RoutingModel* model_;
  RoutingSolution sol_;
  std::vector<RouteEval> evals_;
};

inline constexpr double kImproveEps = 1e-7;

/// Best-improvement descent over N1..N4, restarting at N1 after every
/// improving move; returns a local minimum for all four neighborhoods.
inline constexpr Neighborhood kAllNeighborhoods[] = {Neighborhood::Shift, Neighborhood::Swap,
                                                     Neighborhood::Recharge, Neighborhood::Rotate};

inline RoutingSolution vnd(const RoutingModel& model, const RoutingSolution& start, double lambda,
                           std::span<const Neighborhood> order = kAllNeighborhoods) {
  SearchPoint x(model, start);
  std::size_t j = 0;
  while (j < order.size()) {
    std::optional<Move> best;
    double best_delta = -kImproveEps;
    for (const auto& m : moves_of(order[j], model, x.solution(), lambda)) {
      const auto d = x.delta(m, lambda);
      if (d && *d < best_delta) {
        best_delta = *d;
        best = m;
      }
    }
    if (best) {
      x.apply(*best);
      j = 0;
    } else {
      ++j;
    }
  }
  return x.solution();
}

/// Pushes an invalid solution towards validity: charging is re-optimized
/// first with violation priced like an unserved request, then a full
/// descent at that price drops whatever charging cannot fix.
inline RoutingSolution repair(const RoutingModel& model, const RoutingSolution& sol) {
  const double lambda = model.instance().config.alpha_u;
  constexpr Neighborhood recharge_only[] = {Neighborhood::Recharge};
  return vnd(model, vnd(model, sol, lambda, recharge_only), lambda);
}

/// A uniformly random N1 (index 1) or N2 (index 2) neighbor; `sol` itself
/// when that neighborhood is empty.
template <typename Rng>
RoutingSolution shake(const RoutingModel& model, const RoutingSolution& sol, int index, Rng& rng) {
  const auto moves = index == 1 ? shift_moves(model, sol) : swap_moves(model, sol);
  if (moves.empty()) return sol;
  std::uniform_int_distribution<std::size_t> pick(0, moves.size() - 1);
  return apply_move(model, sol, moves[pick(rng)]);
}

/// Greedy start: requests by ascending departure, each appended to the
/// aircraft with the cheapest feasible connection from its current last
/// stop (random among ties), or left unserved. No charging.
template <typename Rng>
RoutingSolution initial_solution(const RoutingModel& model, Rng& rng) {
  const auto& inst = model.instance();
  RoutingSolution sol;
  sol.routes.resize(inst.fleet.size());
  std::vector<int> order(inst.requests.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return inst.requests[a].depart_minute < inst.requests[b].depart_minute;
  });
  for (int pos : order) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> ties;
    for (std::size_t a = 0; a < sol.routes.size(); ++a) {
      const auto& route = sol.routes[a];
      const Connection& c = route.empty() ? model.from_start(a, pos)
                                          : model.between(model.position(route.back().request), pos);
      if (!c.feasible) continue;
      if (c.cost < best - 1e-12) {
        best = c.cost;
        ties = {a};
      } else if (std::abs(c.cost - best) <= 1e-12) {
        ties.push_back(a);
      }
    }
    const int id = inst.requests[pos].id;
    if (ties.empty()) {
      sol.unserved.push_back(id);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
      sol.routes[ties[pick(rng)]].push_back(Visit{id, ChargePlan{}});
    }
  }
  std::sort(sol.unserved.begin(), sol.unserved.end());
  return sol;
}

struct VnsOptions {
  /// Overrides the instance's time budget when set.
  std::optional<double> time_budget_seconds;
  /// Overrides the instance's iteration cap when set (0 = unbounded).
  std::optional<long> max_iterations;
  /// When false only the budget, the iteration cap and `stop_when` end the run.
  bool stop_on_stagnation = true;
  /// Stops the search as soon as the best valid solution satisfies this.
  std::function<bool(const SearchObjective&)> stop_when;
  /// Called on every improvement of the best valid solution.
  std::function<void(const RoutingSolution&, const SearchObjective&, double elapsed)> on_best;
};

struct VnsResult {
  RoutingSolution best;
  SearchObjective objective;
  long iterations = 0;
  double elapsed_seconds = 0.0;
  double final_lambda = 0.0;
  bool stopped_by_predicate = false;
};

/// Shake / descend / move loop. Returns the lexicographically best
/// zero-violation solution visited (the all-unserved solution if none).
template <typename Rng>
VnsResult uam_vns(const RoutingModel& model, const RoutingSolution& start, Rng& rng,
                  const VnsOptions& opts = {}) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const auto& inst = model.instance();
  const auto& params = inst.config.vns;
  const double budget = opts.time_budget_seconds.value_or(params.time_budget_seconds);
  const long max_iter = opts.max_iterations.value_or(params.max_iterations);
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

  VnsResult res;
  SearchPoint best(model, all_unserved(inst));
  SearchPoint x(model, start);
  auto offer = [&](const SearchPoint& p) {
    if (!p.valid()) return false;
    if (!p.objective(0.0).lex_better(best.objective(0.0))) return false;
    best = p;
    if (opts.on_best) opts.on_best(best.solution(), best.objective(0.0), elapsed());
    return true;
  };
  offer(x);

  auto done = [&] {
    if (opts.stop_when && opts.stop_when(best.objective(0.0))) {
      res.stopped_by_predicate = true;
      return true;
    }
    return false;
  };

  PenaltyState penalty;
  long stagnant = 0;
  bool finished = done() || inst.requests.empty();
  while (!finished) {
    int i = 1;
    while (i <= 2 && !finished) {
      const auto shaken = shake(model, x.solution(), i, rng);
      SearchPoint candidate(model, vnd(model, shaken, penalty.lambda));
      bool improved = false;
      if (candidate.penalized(penalty.lambda) < x.penalized(penalty.lambda) - kImproveEps) {
        x = candidate;
        i = 1;
        improved = true;
      } else {
        ++i;
      }
      if (offer(candidate)) improved = true;
      if (!candidate.valid() && candidate.solution().unserved.size() <= best.solution().unserved.size() &&
          offer(SearchPoint(model, repair(model, candidate.solution()))))
        improved = true;
      penalty = update_penalty(std::move(penalty), candidate.valid(), params);
      ++res.iterations;
      // Stagnation is only counted once the incumbent is valid; before that
      // the penalty is still steering the search.
      stagnant = improved || !x.valid() ? 0 : stagnant + 1;
      finished = done() || (opts.stop_on_stagnation && stagnant >= params.stagnation_limit) || elapsed() >= budget ||
                 (max_iter > 0 && res.iterations >= max_iter);
    }
  }
  res.best = best.solution();
  res.objective = best.objective(0.0);
  res.elapsed_seconds = elapsed();
  res.final_lambda = penalty.lambda;
  return res;
}

}  // namespace uam
