#pragma once

// Centralized planners: BFS and PARALLEL wake-up, pairwise phase adaptation
// and the closed-form constructions for particular constraint families.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "constraints.hpp"
#include "numtheory.hpp"
#include "random.hpp"
#include "schedule.hpp"
#include "topology.hpp"

namespace wakeup {

/// f: 0 unexplored, 1 discovered, 2 explored. t: 1 once the phase is frozen.
struct NodeFlags {
  int f = 0;
  int t = 0;
};

struct TraceStep {
  int step = 0;
  NodeId node = 0;
  std::string action;
  NodeId neighbor = 0;  // 0 when the step is node-local
  Slot period = 0;
  Slot phase = 0;

  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

using Trace = std::vector<TraceStep>;

inline std::string dump_trace(const Trace& trace) {
  std::string out;
  for (auto& s : trace)
    out += std::to_string(s.step) + " " + std::to_string(s.node) + " " + s.action + " " + std::to_string(s.neighbor) +
           " " + std::to_string(s.period) + " " + std::to_string(s.phase) + "\n";
  return out;
}

/// A phase adaptation performed while node `node` activated.
/// `cost_without` counts the phases needed to serve j and k through plain
/// visits (distinct phases at the node plus phases appended at j or k);
/// `cost_with` is the single shared phase.
struct Adaptation {
  NodeId node = 0;
  NodeId j = 0;
  NodeId k = 0;
  Slot phase = 0;
  int cost_without = 0;
  int cost_with = 1;
};

struct PlanResult {
  Schedule schedule;
  Trace trace;
  std::vector<NodeId> order;  // BFS visit order or PARALLEL activation order
  std::vector<Adaptation> adaptations;
};

using Origins = std::map<NodeId, Slot>;

inline Slot origin_of(const Origins& origins, NodeId v) {
  auto it = origins.find(v);
  return it == origins.end() ? 0 : it->second;
}

inline std::map<NodeId, Slot> assign_periods(const Topology& topo, const ConstraintSet& c, const FactorBasis& basis) {
  std::map<NodeId, Slot> n;
  for (NodeId v : topo.nodes()) n[v] = period(c.lower(v), c.upper(v), basis);
  return n;
}

namespace detail {

inline bool meets(Slot p, Slot np, Slot q, Slot nq) {
  return mod_floor(static_cast<wide>(p) - q, gcd(np, nq)) == 0;
}

inline Slot raise_period(Slot own, const std::vector<Slot>& others) {
  wide g = 0;
  for (Slot x : others) g = gcd(g, x);
  return g == 0 ? own : narrow(lcm(own, g));
}

}  // namespace detail

/// BFS wake-up from the max-degree node (lowest id on ties).
///
/// Every node adopts the root's origin. When a node leaves the queue its
/// period becomes [n_i, gcd(...)] over its neighbors, where neighbors on a
/// lower BFS level contribute their already raised period and the others
/// their initial one. That is what each node can know in a synchronous
/// round-by-round run, so the distributed execution reproduces it exactly.
inline PlanResult bfs_wakeup(const Topology& topo, const ConstraintSet& c, const FactorBasis& basis,
                             const Origins& origins = {}) {
  require_connected(topo);
  PlanResult res;
  if (topo.node_count() == 0) return res;
  const auto initial = assign_periods(topo, c, basis);
  auto n = initial;
  const NodeId root = topo.max_degree_node();
  const Slot alpha = origin_of(origins, root);

  std::map<NodeId, int> level{{root, 0}};
  std::deque<NodeId> q{root};
  int step = 0;
  res.trace.push_back({step++, root, "root", 0, n[root], alpha});
  while (!q.empty()) {
    const NodeId i = q.front();
    q.pop_front();
    res.order.push_back(i);
    for (NodeId j : topo.neighbors(i)) {
      if (level.count(j)) continue;
      level[j] = level[i] + 1;
      q.push_back(j);
      res.trace.push_back({step++, i, "discover", j, n[j], alpha});
    }
    std::vector<Slot> seen;
    for (NodeId j : topo.neighbors(i)) seen.push_back(level[j] < level[i] ? n[j] : initial.at(j));
    n[i] = detail::raise_period(n[i], seen);
    res.trace.push_back({step++, i, "period", 0, n[i], alpha});
  }
  for (NodeId v : topo.nodes()) {
    auto ns = single_phase(v, n[v], alpha, topo.neighbors(v));
    ns.origin = alpha;
    res.schedule[v] = ns;
  }
  return res;
}

/// Phase a (mod n_j) with (n_i, n_j) | a - a_ij and (n_k, n_j) | a_kj - a,
/// i.e. one phase of j that meets both i and k. Empty exactly when
/// gcd(n_i, n_j, n_k) does not divide a_kj - a_ij.
inline std::optional<Slot> adjust_phase(Slot n_i, Slot n_j, Slot n_k, Slot a_ij, Slot a_kj) {
  if (n_i < 1 || n_j < 1 || n_k < 1) throw std::domain_error("adjust_phase: periods must be positive");
  const wide g1 = gcd(n_i, n_j), g2 = gcd(n_k, n_j);
  const auto [e, u, v] = ext_gcd(g2, g1);
  const wide diff = static_cast<wide>(a_kj) - a_ij;
  if (diff % e != 0) return std::nullopt;
  // diff = g2*x0 + g1*y0 with x0 = u * diff / e
  const wide step = g1 / e;
  const wide x0 = mulmod(mod_floor(u, step), mod_floor(diff / e, step), step);
  const wide a = mod_floor(checked_sub(a_kj, checked_mul(g2, x0)), n_j);
  if (mod_floor(a - a_ij, g1) != 0 || mod_floor(a_kj - a, g2) != 0)
    throw std::logic_error("adjust_phase: constructed phase fails verification");
  return narrow(a);
}

/// Explicit (possibly partial) activation list, or seeded random timers.
struct ActivationOrder {
  std::vector<NodeId> list;
  std::optional<std::uint64_t> seed;

  static ActivationOrder from_list(std::vector<NodeId> l) { return {std::move(l), std::nullopt}; }
  static ActivationOrder from_seed(std::uint64_t s) { return {{}, s}; }

  /// Full activation sequence. A partial list is completed with the
  /// remaining nodes in ascending id; a seed draws one timer per node and
  /// sorts by (timer, id).
  std::vector<NodeId> realize(const Topology& topo) const {
    std::vector<NodeId> out;
    if (seed) {
      Rng rng(derive_seed(*seed, {0x74696d6572ULL}));
      std::vector<std::pair<double, NodeId>> timers;
      for (NodeId v : topo.nodes()) timers.emplace_back(uniform_unit(rng), v);
      std::sort(timers.begin(), timers.end());
      for (auto& [_, v] : timers) out.push_back(v);
      return out;
    }
    std::set<NodeId> used;
    for (NodeId v : list) {
      if (!topo.contains(v)) throw std::domain_error("activation order names unknown node " + std::to_string(v));
      if (!used.insert(v).second) throw std::domain_error("activation order repeats node " + std::to_string(v));
      out.push_back(v);
    }
    for (NodeId v : topo.nodes())
      if (!used.count(v)) out.push_back(v);
    return out;
  }
};

namespace detail {

/// Mutable per-node state of PARALLEL wake-up. Phases are absolute epochs;
/// only their residues matter in the output.
struct ParallelState {
  Slot period = 1;
  Slot alpha = 0;
  std::vector<Slot> phases;
  NodeFlags flags;
  std::map<NodeId, Slot> pair;  // neighbor -> own epoch used to meet it

  std::optional<Slot> first_meeting(Slot q, Slot nq) const {
    for (Slot p : phases)
      if (meets(p, period, q, nq)) return p;
    return std::nullopt;
  }
  void add_phase(Slot p) {
    if (std::find(phases.begin(), phases.end(), p) == phases.end()) phases.push_back(p);
  }
};

struct PeerLaw {
  NodeId id = 0;
  Slot alpha = 0;
  Slot period = 1;
};

struct AdaptChoice {
  NodeId j = 0;
  NodeId k = 0;
  Slot phase = 0;
  std::optional<Slot> old_j, old_k;  // phases of the node that served j, k before
};

/// First pair (j, k) of explored neighbors, in the given order, with
/// different origins, no phase of `me` meeting both, and a single phase of
/// `me` that can meet both.
inline std::optional<AdaptChoice> find_adaptation(const ParallelState& me, const std::vector<PeerLaw>& explored) {
  const std::size_t m = explored.size(), np = me.phases.size();
  std::vector<std::vector<char>> hit(m, std::vector<char>(np, 0));
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t p = 0; p < np; ++p)
      hit[x][p] = meets(me.phases[p], me.period, explored[x].alpha, explored[x].period);
  auto first_hit = [&](std::size_t x) -> std::optional<Slot> {
    for (std::size_t p = 0; p < np; ++p)
      if (hit[x][p]) return me.phases[p];
    return std::nullopt;
  };
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = x + 1; y < m; ++y) {
      const auto &pj = explored[x], &pk = explored[y];
      if (pj.alpha == pk.alpha) continue;
      bool common = false;
      for (std::size_t p = 0; p < np && !common; ++p) common = hit[x][p] && hit[y][p];
      if (common) continue;
      auto a = adjust_phase(pj.period, me.period, pk.period, pj.alpha, pk.alpha);
      if (!a) continue;
      return AdaptChoice{pj.id, pk.id, *a, first_hit(x), first_hit(y)};
    }
  return std::nullopt;
}

/// A free node moves its origin to the new phase and drops the phases it
/// used for j and k; a frozen node keeps its origin and swaps those phases
/// for the new one.
inline void apply_adaptation(ParallelState& me, const AdaptChoice& c) {
  std::vector<Slot> kept;
  if (me.flags.t == 0) {
    kept.push_back(c.phase);
    for (Slot p : me.phases)
      if (p != me.alpha && p != c.old_j && p != c.old_k && p != c.phase) kept.push_back(p);
    me.alpha = c.phase;
  } else {
    for (Slot p : me.phases)
      if (p == me.alpha || (p != c.old_j && p != c.old_k)) kept.push_back(p);
    if (std::find(kept.begin(), kept.end(), c.phase) == kept.end()) kept.push_back(c.phase);
  }
  me.phases = std::move(kept);
  me.pair[c.j] = c.phase;
  me.pair[c.k] = c.phase;
}

inline NodeSchedule finalize(NodeId v, const ParallelState& st) {
  NodeSchedule ns;
  ns.node = v;
  ns.period = st.period;
  ns.origin = st.alpha < 0 ? 0 : st.alpha;
  std::set<Slot> residues;
  for (auto& [j, p] : st.pair) {
    const Slot r = static_cast<Slot>(mod_floor(p, st.period));
    ns.neighbor_phase[j] = r;
    residues.insert(r);
  }
  if (residues.empty()) residues.insert(static_cast<Slot>(mod_floor(st.alpha, st.period)));
  ns.phases.assign(residues.begin(), residues.end());
  return ns;
}

}  // namespace detail

/// PARALLEL wake-up executed one activation at a time in `order`.
///
/// An activating node i raises its period, then
///  - if unexplored and some neighbor is already discovered or explored, it
///    aligns to the first such neighbor and freezes that neighbor's phase;
///  - otherwise, for the first pair of explored neighbors j, k with no
///    common phase at i, it tries one phase of i meeting both;
/// and finally visits the remaining neighbors: unexplored ones adopt its
/// origin, the others reuse a meeting phase or gain its origin.
/// Output phase sets keep only the phases actually used on some edge.
inline PlanResult parallel_wakeup(const Topology& topo, const ConstraintSet& c, const FactorBasis& basis,
                                  const ActivationOrder& order, const Origins& origins = {}) {
  require_connected(topo);
  PlanResult res;
  res.order = order.realize(topo);
  const auto initial = assign_periods(topo, c, basis);
  std::map<NodeId, detail::ParallelState> st;
  for (NodeId v : topo.nodes()) {
    auto& s = st[v];
    s.period = initial.at(v);
    s.alpha = origin_of(origins, v);
    s.phases = {s.alpha};
  }
  int step = 0;
  for (NodeId i : res.order) {
    auto& si = st[i];
    {
      std::vector<Slot> periods;
      for (NodeId j : topo.neighbors(i)) periods.push_back(st[j].period);
      si.period = detail::raise_period(si.period, periods);
    }
    res.trace.push_back({step++, i, "activate", 0, si.period, si.alpha});

    std::set<NodeId> adapted;
    std::optional<NodeId> anchor;
    if (si.flags.f == 0)
      for (NodeId j : topo.neighbors(i))
        if (st[j].flags.f != 0) {
          anchor = j;
          break;
        }
    if (anchor) {
      auto& sj = st[*anchor];
      si.alpha = sj.alpha;
      si.phases = {sj.alpha};
      sj.flags.t = 1;
      res.trace.push_back({step++, i, "align", *anchor, si.period, si.alpha});
    } else {
      std::vector<detail::PeerLaw> explored;
      for (NodeId j : topo.neighbors(i))
        if (st[j].flags.f == 2) explored.push_back({j, st[j].alpha, st[j].period});
      if (auto choice = detail::find_adaptation(si, explored)) {
        const NodeId j = choice->j, k = choice->k;
        const auto &sj = st[j], &sk = st[k];
        Adaptation ad{i, j, k, choice->phase, 0, 1};
        std::set<Slot> at_i{choice->old_j.value_or(si.alpha), choice->old_k.value_or(si.alpha)};
        ad.cost_without = static_cast<int>(at_i.size());
        if (!choice->old_j && !sj.first_meeting(si.alpha, si.period)) ++ad.cost_without;
        if (!choice->old_k && !sk.first_meeting(si.alpha, si.period)) ++ad.cost_without;
        res.adaptations.push_back(ad);

        detail::apply_adaptation(si, *choice);
        st[j].pair[i] = sj.alpha;
        st[k].pair[i] = sk.alpha;
        adapted = {j, k};
        res.trace.push_back({step++, i, "adapt", j, si.period, choice->phase});
        res.trace.push_back({step++, i, "adapt", k, si.period, choice->phase});
      }
    }

    for (NodeId j : topo.neighbors(i)) {
      if (adapted.count(j)) continue;
      auto& sj = st[j];
      if (sj.flags.f == 0) {
        sj.alpha = si.alpha;
        sj.phases = {si.alpha};
        sj.flags.f = 1;
        res.trace.push_back({step++, i, "discover", j, sj.period, si.alpha});
        continue;
      }
      auto q = sj.first_meeting(si.alpha, si.period);
      if (!q) {
        sj.add_phase(si.alpha);
        q = si.alpha;
        res.trace.push_back({step++, i, "grow", j, sj.period, si.alpha});
      }
      if (sj.flags.f == 2) {
        si.pair[j] = si.alpha;
        sj.pair[i] = *q;
        res.trace.push_back({step++, i, "meet", j, sj.period, *q});
      }
    }
    si.flags.f = 2;
  }
  for (NodeId v : topo.nodes()) res.schedule[v] = detail::finalize(v, st[v]);
  return res;
}

/// Uniform smooth U with smooth L_i <= U: n_i = L_i and a common phase.
/// Returned only when verification confirms it is tight.
inline std::optional<Schedule> special_case_schedule(const Topology& topo, const ConstraintSet& c,
                                                     const FactorBasis& basis, Slot phase = 0) {
  if (topo.node_count() == 0) return std::nullopt;
  const Slot u = c.upper(topo.nodes().front());
  if (!is_smooth(u, basis)) return std::nullopt;
  for (NodeId v : topo.nodes())
    if (c.upper(v) != u || c.lower(v) > u || !is_smooth(c.lower(v), basis)) return std::nullopt;
  Schedule s;
  for (NodeId v : topo.nodes()) s[v] = single_phase(v, c.lower(v), phase, topo.neighbors(v));
  if (!verify(s, topo, c).tight) return std::nullopt;
  return s;
}

/// Node at BFS level r from `root` gets period p^g[r] * L0; all share `phase`.
inline Schedule power_tree_schedule(const Topology& topo, NodeId root, Slot l0, Slot p, const std::vector<int>& g,
                                    Slot phase = 0) {
  if (l0 < 1) throw std::domain_error("power_tree_schedule: L0 must be positive");
  if (!is_prime(p)) throw std::domain_error("power_tree_schedule: p must be prime");
  const auto dist = bfs_distances(topo, root);
  if (dist.size() != topo.node_count()) throw DisconnectedError(unreachable_from(topo, root));
  Schedule s;
  for (NodeId v : topo.nodes()) {
    const auto r = static_cast<std::size_t>(dist.at(v));
    if (r >= g.size()) throw std::domain_error("power_tree_schedule: no exponent for level " + std::to_string(r));
    if (g[r] < 0) throw std::domain_error("power_tree_schedule: exponents must be non-negative");
    wide n = l0;
    for (int e = 0; e < g[r]; ++e) n = checked_mul(n, p);
    s[v] = single_phase(v, narrow(n), phase, topo.neighbors(v));
  }
  return s;
}

}  // namespace wakeup
