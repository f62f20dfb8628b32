#pragma once

// Message-level simulation of the distributed BFS and PARALLEL wake-up
// protocols, plus local join/removal on an existing schedule.
//
// Each node keeps only its own state and what neighbors told it. Nodes are
// assumed to know their neighbors' initial periods from neighbor discovery,
// and the BFS leader is given.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "constraints.hpp"
#include "numtheory.hpp"
#include "planner.hpp"
#include "schedule.hpp"
#include "topology.hpp"

namespace wakeup {

enum class MessageKind { TimerFreeze, PhaseAssign, PeriodAnnounce, Ack };

inline const char* kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::TimerFreeze: return "FREEZE";
    case MessageKind::PhaseAssign: return "ASSIGN";
    case MessageKind::PeriodAnnounce: return "ANNOUNCE";
    case MessageKind::Ack: return "ACK";
  }
  return "?";
}

struct ProtoMessage {
  MessageKind kind{};
  NodeId src = 0;
  NodeId dst = 0;
  Slot period = 0;
  Slot phase = 0;
  int send_round = 0;
};

struct RunStats {
  std::size_t messages_total = 0;
  std::map<Edge, std::size_t> messages_per_edge;
  int rounds = 0;
  bool converged = false;
  std::vector<ProtoMessage> log;
  bool keep_log = true;  // large sweeps only need the counters

  void record(const ProtoMessage& m) {
    ++messages_total;
    ++messages_per_edge[std::minmax(m.src, m.dst)];
    if (keep_log) log.push_back(m);
  }
};

inline std::string dump_messages(const RunStats& stats) {
  std::string out;
  for (auto& m : stats.log)
    out += std::to_string(m.send_round) + " " + kind_name(m.kind) + " " + std::to_string(m.src) + " " +
           std::to_string(m.dst) + " " + std::to_string(m.period) + " " + std::to_string(m.phase) + "\n";
  return out;
}

struct DistributedResult {
  Schedule schedule;
  RunStats stats;
};

/// Synchronous BFS flood from the leader. In round r every node first
/// reached in round r - 1 (the leader in round 0) fixes its period from the
/// ASSIGNs it got plus the initial periods of the rest, then sends ASSIGN to
/// every neighbor that has not assigned it and ACKs its parent.
inline DistributedResult simulate_bfs(const Topology& topo, const ConstraintSet& c, const FactorBasis& basis,
                                      const Origins& origins = {}, bool keep_log = true) {
  require_connected(topo);
  DistributedResult res;
  res.stats.keep_log = keep_log;
  if (topo.node_count() == 0) return res;

  struct Local {
    Slot initial = 0;
    Slot period = 0;
    std::optional<Slot> alpha;
    std::optional<NodeId> parent;
    std::map<NodeId, Slot> assigned;  // neighbor -> its final period, from ASSIGN
    std::map<NodeId, Slot> known;     // neighbor -> initial period, from discovery
    bool done = false;
  };
  std::map<NodeId, Local> node;
  for (NodeId v : topo.nodes()) {
    node[v].initial = node[v].period = period(c.lower(v), c.upper(v), basis);
  }
  for (NodeId v : topo.nodes())
    for (NodeId j : topo.neighbors(v)) node[v].known[j] = node[j].initial;

  const NodeId leader = topo.max_degree_node();
  node[leader].alpha = origin_of(origins, leader);
  std::vector<NodeId> frontier{leader};
  int round = 0;
  while (!frontier.empty()) {
    std::vector<ProtoMessage> outbox;
    for (NodeId i : frontier) {
      auto& me = node[i];
      std::vector<Slot> seen;
      for (NodeId j : topo.neighbors(i)) {
        auto it = me.assigned.find(j);
        seen.push_back(it != me.assigned.end() ? it->second : me.known.at(j));
      }
      me.period = detail::raise_period(me.period, seen);
      me.done = true;
      for (NodeId j : topo.neighbors(i))
        if (!me.assigned.count(j)) outbox.push_back({MessageKind::PhaseAssign, i, j, me.period, *me.alpha, round});
      if (me.parent) outbox.push_back({MessageKind::Ack, i, *me.parent, me.period, *me.alpha, round});
    }
    std::set<NodeId> next;
    for (auto& m : outbox) {
      res.stats.record(m);
      auto& dst = node[m.dst];
      if (m.kind != MessageKind::PhaseAssign || dst.done) continue;
      dst.assigned[m.src] = m.period;
      if (!dst.alpha) {
        dst.alpha = m.phase;
        dst.parent = m.src;
      }
      next.insert(m.dst);
    }
    frontier.assign(next.begin(), next.end());
    ++round;
  }
  res.stats.rounds = round;
  res.stats.converged = std::all_of(node.begin(), node.end(), [](auto& kv) { return kv.second.done; });
  for (auto& [v, me] : node) {
    auto ns = single_phase(v, me.period, *me.alpha, topo.neighbors(v));
    ns.origin = *me.alpha;
    res.schedule[v] = ns;
  }
  return res;
}

namespace detail {

/// What a PARALLEL node knows about one neighbor.
struct PeerView {
  Slot period = 0;
  Slot alpha = 0;
  int f = 0;
};

struct ParallelNode {
  ParallelState self;
  std::map<NodeId, PeerView> peers;
  bool activated = false;
};

/// Payload of an ASSIGN: the sender's fixed law plus what it did to the
/// receiver during this activation.
enum class AssignRole { Visit, Anchor, Adapted };

struct AssignPayload {
  Slot period = 0;
  Slot alpha = 0;
  AssignRole role = AssignRole::Visit;
};

class ParallelNetwork {
 public:
  ParallelNetwork(const Topology& topo, const std::map<NodeId, Slot>& initial, const Origins& origins)
      : topo_(topo) {
    for (NodeId v : topo.nodes()) {
      auto& n = nodes_[v];
      n.self.period = initial.at(v);
      n.self.alpha = origin_of(origins, v);
      n.self.phases = {n.self.alpha};
    }
  }

  ParallelNetwork(const Topology& topo, std::map<NodeId, ParallelNode> nodes) : topo_(topo), nodes_(std::move(nodes)) {}

  /// One activation of node i in wave `round`.
  void activate(NodeId i, int round, RunStats& stats, std::vector<Adaptation>* adaptations = nullptr) {
    auto& me = nodes_.at(i);
    // freeze the timers of neighbors that have not fired; their ACK reports state
    for (NodeId j : topo_.neighbors(i)) {
      auto& peer = nodes_.at(j);
      if (peer.activated) continue;
      stats.record({MessageKind::TimerFreeze, i, j, me.self.period, me.self.alpha, round});
      stats.record({MessageKind::Ack, j, i, peer.self.period, peer.self.alpha, round});
      me.peers[j] = {peer.self.period, peer.self.alpha, peer.self.flags.f};
    }

    std::vector<Slot> periods;
    for (NodeId j : topo_.neighbors(i)) periods.push_back(me.peers.at(j).period);
    me.self.period = raise_period(me.self.period, periods);

    std::map<NodeId, AssignRole> role;
    std::optional<NodeId> anchor;
    if (me.self.flags.f == 0)
      for (NodeId j : topo_.neighbors(i))
        if (me.peers.at(j).f != 0) {
          anchor = j;
          break;
        }
    if (anchor) {
      me.self.alpha = me.peers.at(*anchor).alpha;
      me.self.phases = {me.self.alpha};
      role[*anchor] = AssignRole::Anchor;
    } else {
      try_adapt(i, role, adaptations);
    }

    for (NodeId j : topo_.neighbors(i)) {
      auto it = role.find(j);
      const AssignRole r = it == role.end() ? AssignRole::Visit : it->second;
      stats.record({MessageKind::PhaseAssign, i, j, me.self.period, me.self.alpha, round});
      deliver(j, i, {me.self.period, me.self.alpha, r});
    }
    me.self.flags.f = 2;
    me.activated = true;
  }

  std::map<NodeId, ParallelNode>& nodes() { return nodes_; }

  Schedule schedule() const {
    Schedule s;
    for (auto& [v, n] : nodes_) s[v] = finalize(v, n.self);
    return s;
  }

 private:
  void try_adapt(NodeId i, std::map<NodeId, AssignRole>& role, std::vector<Adaptation>* adaptations) {
    auto& me = nodes_.at(i);
    std::vector<PeerLaw> explored;
    for (NodeId j : topo_.neighbors(i))
      if (const auto& v = me.peers.at(j); v.f == 2) explored.push_back({j, v.alpha, v.period});
    auto choice = find_adaptation(me.self, explored);
    if (!choice) return;
    if (adaptations) adaptations->push_back({i, choice->j, choice->k, choice->phase, 0, 1});
    apply_adaptation(me.self, *choice);
    role[choice->j] = role[choice->k] = AssignRole::Adapted;
  }

  // Receiver-side handling of an ASSIGN from activating node `src`.
  void deliver(NodeId dst, NodeId src, const AssignPayload& m) {
    auto& rx = nodes_.at(dst);
    rx.peers[src] = {m.period, m.alpha, 2};
    switch (m.role) {
      case AssignRole::Anchor:
        rx.self.flags.t = 1;
        break;
      case AssignRole::Adapted:
        rx.self.pair[src] = rx.self.alpha;
        return;
      case AssignRole::Visit:
        break;
    }
    if (rx.self.flags.f == 0) {
      rx.self.alpha = m.alpha;
      rx.self.phases = {m.alpha};
      rx.self.flags.f = 1;
      return;
    }
    auto q = rx.self.first_meeting(m.alpha, m.period);
    if (!q) {
      rx.self.add_phase(m.alpha);
      q = m.alpha;
    }
    if (rx.self.flags.f == 2) {
      rx.self.pair[src] = *q;
      nodes_.at(src).self.pair[dst] = m.alpha;
    }
  }

  const Topology& topo_;
  std::map<NodeId, ParallelNode> nodes_;
};

/// Wave index of each activation: two activations commute unless the nodes
/// are within two hops, so a node fires one wave after the latest earlier
/// node in its two-hop neighborhood.
inline std::map<NodeId, int> activation_waves(const Topology& topo, const std::vector<NodeId>& order) {
  // near[j]: largest wave among already fired neighbors of j
  std::map<NodeId, int> wave, near;
  for (NodeId i : order) {
    int w = 0;
    for (NodeId j : topo.neighbors(i)) {
      if (auto it = wave.find(j); it != wave.end()) w = std::max(w, it->second + 1);
      if (auto it = near.find(j); it != near.end()) w = std::max(w, it->second + 1);
    }
    wave[i] = w;
    for (NodeId j : topo.neighbors(i)) {
      auto [it, fresh] = near.emplace(j, w);
      if (!fresh) it->second = std::max(it->second, w);
    }
  }
  return wave;
}

}  // namespace detail

/// Distributed PARALLEL wake-up with seeded timers. Per edge: the first
/// endpoint to fire sends FREEZE and gets an ACK carrying the peer's state,
/// and each endpoint sends one ASSIGN when it fires, so exactly 4M messages.
inline DistributedResult simulate_parallel(const Topology& topo, const ConstraintSet& c, const FactorBasis& basis,
                                           const ActivationOrder& order, const Origins& origins = {},
                                           bool keep_log = true) {
  require_connected(topo);
  DistributedResult res;
  res.stats.keep_log = keep_log;
  const auto realized = order.realize(topo);
  const auto waves = detail::activation_waves(topo, realized);
  detail::ParallelNetwork net(topo, assign_periods(topo, c, basis), origins);
  for (NodeId i : realized) net.activate(i, waves.at(i), res.stats);
  int last = -1;
  for (auto& [_, w] : waves) last = std::max(last, w);
  res.stats.rounds = last + 1;
  res.stats.converged = true;
  res.schedule = net.schedule();
  return res;
}

inline DistributedResult simulate_parallel(const Topology& topo, const ConstraintSet& c, const FactorBasis& basis,
                                           std::uint64_t seed, const Origins& origins = {}) {
  return simulate_parallel(topo, c, basis, ActivationOrder::from_seed(seed), origins);
}

/// Adds `new_node` to a scheduled network by running one PARALLEL
/// activation for it. Existing nodes count as explored; each neighbor's
/// law is announced to the joiner in the ACK of its FREEZE. Returns the
/// updated topology alongside the schedule.
struct JoinResult {
  Topology topology;
  Schedule schedule;
  RunStats stats;
  std::vector<Adaptation> adaptations;
};

inline JoinResult node_join(const Schedule& s, const Topology& topo, const ConstraintSet& c, const FactorBasis& basis,
                            NodeId new_node, const std::vector<NodeId>& new_edges, std::optional<Point> where = {}) {
  if (topo.contains(new_node) || s.count(new_node))
    throw std::domain_error("node " + std::to_string(new_node) + " already exists");
  if (new_edges.empty()) throw std::domain_error("joining node needs at least one neighbor");
  require_covers(s, topo);
  JoinResult res;
  res.topology = topo.with_node(new_node, new_edges, where);

  std::map<NodeId, detail::ParallelNode> nodes;
  for (NodeId v : topo.nodes()) {
    const auto& ns = s.at(v);
    auto& n = nodes[v];
    n.activated = true;
    n.self.period = ns.period;
    n.self.flags = {2, 1};
    // epochs are interchangeable with residues for an existing law
    n.self.phases = ns.phases;
    n.self.alpha = ns.phases.front();
    if (std::binary_search(ns.phases.begin(), ns.phases.end(), static_cast<Slot>(mod_floor(ns.origin, ns.period))))
      n.self.alpha = static_cast<Slot>(mod_floor(ns.origin, ns.period));
    for (auto& [j, a] : ns.neighbor_phase) n.self.pair[j] = a;
  }
  auto& joiner = nodes[new_node];
  joiner.self.period = period(c.lower(new_node), c.upper(new_node), basis);
  const NodeId first = res.topology.neighbors(new_node).front();
  joiner.self.alpha = nodes.at(first).self.alpha;
  joiner.self.phases = {joiner.self.alpha};
  joiner.self.flags = {1, 0};
  for (NodeId j : res.topology.neighbors(new_node)) {
    const auto& peer = nodes.at(j).self;
    joiner.peers[j] = {peer.period, peer.alpha, 2};
    res.stats.record({MessageKind::TimerFreeze, new_node, j, joiner.self.period, joiner.self.alpha, 0});
    res.stats.record({MessageKind::Ack, j, new_node, peer.period, peer.alpha, 0});
  }
  // mark neighbors activated so activate() does not freeze them a second time
  detail::ParallelNetwork net(res.topology, std::move(nodes));
  RunStats assign_stats;
  net.activate(new_node, 0, assign_stats, &res.adaptations);
  for (auto& m : assign_stats.log)
    if (m.kind == MessageKind::PhaseAssign) res.stats.record(m);
  res.stats.rounds = 1;
  res.stats.converged = true;

  // Rebuild only the joiner and its neighbors; everything else is copied.
  res.schedule = s;
  const auto fresh = net.schedule();
  res.schedule[new_node] = fresh.at(new_node);
  for (NodeId j : new_edges) {
    auto ns = s.at(j);
    const Slot r = fresh.at(j).neighbor_phase.at(new_node);
    ns.neighbor_phase[new_node] = r;
    if (!std::binary_search(ns.phases.begin(), ns.phases.end(), r)) {
      ns.phases.push_back(r);
      std::sort(ns.phases.begin(), ns.phases.end());
    }
    res.schedule[j] = ns;
  }
  return res;
}

/// Drops a node and its edges; neighbors forget the phase they used for it
/// and release phases no other neighbor relies on.
inline std::pair<Topology, Schedule> node_remove(const Schedule& s, const Topology& topo, NodeId node) {
  if (!topo.contains(node)) throw std::domain_error("unknown node " + std::to_string(node));
  require_covers(s, topo);
  auto t = topo.without_node(node);
  Schedule out = s;
  out.erase(node);
  for (NodeId j : topo.neighbors(node)) {
    auto& ns = out.at(j);
    ns.neighbor_phase.erase(node);
    if (ns.neighbor_phase.empty()) continue;
    std::set<Slot> used;
    for (auto& [_, a] : ns.neighbor_phase) used.insert(a);
    ns.phases.assign(used.begin(), used.end());
  }
  return {t, out};
}

/// Repair after a node fails and comes back with the same links: remove it,
/// then run a local join. Nodes more than one hop away keep their laws.
inline JoinResult node_rejoin(const Schedule& s, const Topology& topo, const ConstraintSet& c,
                              const FactorBasis& basis, NodeId node) {
  if (!topo.contains(node)) throw std::domain_error("unknown node " + std::to_string(node));
  const auto links = topo.neighbors(node);
  const auto where = topo.position(node);
  auto [t, pruned] = node_remove(s, topo, node);
  return node_join(pruned, t, c, basis, node, links, where);
}

}  // namespace wakeup
