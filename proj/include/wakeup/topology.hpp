#pragma once

// Undirected network graph, random deployments, constraint draws and
// sink-rooted routing trees.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "constraints.hpp"
#include "random.hpp"

namespace wakeup {

struct Point {
  double x = 0;
  double y = 0;
};

using Edge = std::pair<NodeId, NodeId>;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DisconnectedError : public std::runtime_error {
 public:
  explicit DisconnectedError(std::vector<NodeId> unreachable)
      : std::runtime_error(message(unreachable)), unreachable_(std::move(unreachable)) {}
  const std::vector<NodeId>& unreachable() const { return unreachable_; }

 private:
  static std::string message(const std::vector<NodeId>& nodes) {
    std::string s = "graph is disconnected; unreachable nodes:";
    for (std::size_t i = 0; i < nodes.size() && i < 20; ++i) s += " " + std::to_string(nodes[i]);
    if (nodes.size() > 20) s += " ...";
    return s;
  }
  std::vector<NodeId> unreachable_;
};

/// Immutable undirected graph G(V, E).
///
/// Neighbor lists are ordered by descending neighbor degree, ties broken by
/// ascending id; every algorithm that walks neighbors uses this order.
class Topology {
 public:
  Topology() = default;

  Topology(std::vector<NodeId> nodes, const std::vector<Edge>& edges,
           std::map<NodeId, Point> positions = {})
      : nodes_(std::move(nodes)), positions_(std::move(positions)) {
    std::sort(nodes_.begin(), nodes_.end());
    if (std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end())
      throw std::invalid_argument("duplicate node id");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i] < 1) throw std::invalid_argument("node ids must be positive");
      index_[nodes_[i]] = i;
    }
    adjacency_.resize(nodes_.size());
    std::set<Edge> seen;
    for (auto [u, v] : edges) {
      if (u == v) throw std::invalid_argument("self-loop at node " + std::to_string(u));
      if (!contains(u) || !contains(v)) throw std::invalid_argument("edge references unknown node");
      Edge e = std::minmax(u, v);
      if (!seen.insert(e).second)
        throw std::invalid_argument("duplicate edge " + std::to_string(e.first) + "-" + std::to_string(e.second));
      adjacency_[index(u)].push_back(v);
      adjacency_[index(v)].push_back(u);
    }
    edges_.assign(seen.begin(), seen.end());
    for (auto& list : adjacency_)
      std::sort(list.begin(), list.end(), [this](NodeId a, NodeId b) { return degree_before(a, b); });
  }

  const std::vector<NodeId>& nodes() const { return nodes_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  /// Edges as (u, v) with u < v, lexicographically sorted.
  const std::vector<Edge>& edges() const { return edges_; }

  bool contains(NodeId id) const { return index_.count(id) != 0; }

  std::size_t index(NodeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::out_of_range("unknown node " + std::to_string(id));
    return it->second;
  }

  const std::vector<NodeId>& neighbors(NodeId id) const { return adjacency_[index(id)]; }
  std::size_t degree(NodeId id) const { return neighbors(id).size(); }

  bool has_edge(NodeId u, NodeId v) const {
    const auto& list = neighbors(u);
    return std::find(list.begin(), list.end(), v) != list.end();
  }

  bool has_positions() const { return !positions_.empty(); }
  const std::map<NodeId, Point>& positions() const { return positions_; }
  std::optional<Point> position(NodeId id) const {
    auto it = positions_.find(id);
    if (it == positions_.end()) return std::nullopt;
    return it->second;
  }

  /// The neighbor ordering: higher degree first, then lower id.
  bool degree_before(NodeId a, NodeId b) const {
    const auto da = adjacency_[index(a)].size(), db = adjacency_[index(b)].size();
    return da != db ? da > db : a < b;
  }

  /// Max-degree node, lowest id on ties.
  NodeId max_degree_node() const {
    if (nodes_.empty()) throw std::domain_error("empty topology");
    NodeId best = nodes_.front();
    for (NodeId v : nodes_)
      if (degree(v) > degree(best)) best = v;
    return best;
  }

  Topology with_node(NodeId id, const std::vector<NodeId>& attach, std::optional<Point> where = {}) const {
    if (contains(id)) throw std::invalid_argument("node id " + std::to_string(id) + " already present");
    auto nodes = nodes_;
    nodes.push_back(id);
    auto edges = edges_;
    for (NodeId v : attach) edges.emplace_back(id, v);
    auto pos = positions_;
    if (where) pos[id] = *where;
    return Topology(std::move(nodes), edges, std::move(pos));
  }

  Topology without_node(NodeId id) const {
    std::vector<NodeId> nodes;
    for (NodeId v : nodes_)
      if (v != id) nodes.push_back(v);
    std::vector<Edge> edges;
    for (auto e : edges_)
      if (e.first != id && e.second != id) edges.push_back(e);
    auto pos = positions_;
    pos.erase(id);
    return Topology(std::move(nodes), edges, std::move(pos));
  }

  friend bool operator==(const Topology& a, const Topology& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<NodeId> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::map<NodeId, Point> positions_;
};

inline Topology geometric_graph(const std::vector<Point>& points, double range) {
  std::vector<NodeId> nodes;
  std::map<NodeId, Point> pos;
  for (std::size_t i = 0; i < points.size(); ++i) {
    nodes.push_back(static_cast<NodeId>(i + 1));
    pos[static_cast<NodeId>(i + 1)] = points[i];
  }
  std::vector<Edge> edges;
  const double r2 = range * range;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double dx = points[i].x - points[j].x, dy = points[i].y - points[j].y;
      if (dx * dx + dy * dy <= r2) edges.emplace_back(static_cast<NodeId>(i + 1), static_cast<NodeId>(j + 1));
    }
  return Topology(std::move(nodes), edges, std::move(pos));
}

/// n nodes uniform in [0, side]^2, linked when within `range` meters.
inline Topology random_geometric(int n, double side, double range, std::uint64_t seed) {
  if (n < 1) throw std::domain_error("random_geometric: n must be >= 1");
  if (!(side > 0) || !(range > 0)) throw std::domain_error("random_geometric: side and range must be positive");
  Rng rng(seed);
  std::vector<Point> pts(static_cast<std::size_t>(n));
  for (auto& p : pts) {
    p.x = uniform_real(rng, 0, side);
    p.y = uniform_real(rng, 0, side);
  }
  return geometric_graph(pts, range);
}

/// Connected deployment: node k >= 2 is dropped uniformly in the disc of
/// radius `range` around a uniformly chosen earlier node (redrawn until it
/// lands inside the square). Links follow the same distance rule.
inline Topology random_connected_geometric(int n, double side, double range, std::uint64_t seed) {
  if (n < 1) throw std::domain_error("random_connected_geometric: n must be >= 1");
  if (!(side > 0) || !(range > 0)) throw std::domain_error("random_connected_geometric: side and range must be positive");
  Rng rng(seed);
  std::vector<Point> pts;
  pts.push_back({uniform_real(rng, 0, side), uniform_real(rng, 0, side)});
  constexpr double two_pi = 6.283185307179586476925286766559;
  while (pts.size() < static_cast<std::size_t>(n)) {
    const auto anchor = pts[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(pts.size()) - 1))];
    const double r = range * std::sqrt(uniform_unit(rng));
    const double theta = two_pi * uniform_unit(rng);
    const Point p{anchor.x + r * std::cos(theta), anchor.y + r * std::sin(theta)};
    if (p.x < 0 || p.x > side || p.y < 0 || p.y > side) continue;
    pts.push_back(p);
  }
  return geometric_graph(pts, range);
}

/// Parses `u v` lines (blank lines and `#` comments ignored).
inline Topology from_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::set<NodeId> nodes;
  std::set<Edge> seen;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long long u, v;
    if (!(ls >> u)) {
      std::string rest;
      if (std::istringstream(line) >> rest) throw ParseError(lineno, "expected `u v`");
      continue;
    }
    std::string extra;
    if (!(ls >> v) || (ls >> extra)) throw ParseError(lineno, "expected exactly two node ids");
    if (u < 1 || v < 1 || u > std::numeric_limits<NodeId>::max() || v > std::numeric_limits<NodeId>::max())
      throw ParseError(lineno, "node ids must be positive 32-bit integers");
    if (u == v) throw ParseError(lineno, "self-loop at node " + std::to_string(u));
    Edge e = std::minmax(static_cast<NodeId>(u), static_cast<NodeId>(v));
    if (!seen.insert(e).second)
      throw ParseError(lineno, "duplicate edge " + std::to_string(e.first) + "-" + std::to_string(e.second));
    nodes.insert(e.first);
    nodes.insert(e.second);
    edges.push_back(e);
  }
  return Topology(std::vector<NodeId>(nodes.begin(), nodes.end()), edges);
}

inline std::string to_edge_list(const Topology& topo) {
  std::string out;
  for (auto [u, v] : topo.edges()) out += std::to_string(u) + " " + std::to_string(v) + "\n";
  return out;
}

/// `node_id x y` lines with six fractional digits.
inline std::string to_positions(const Topology& topo) {
  std::string out;
  char buf[96];
  for (const auto& [id, p] : topo.positions()) {
    std::snprintf(buf, sizeof buf, "%d %.6f %.6f\n", id, p.x, p.y);
    out += buf;
  }
  return out;
}

inline std::map<NodeId, Point> parse_positions(const std::string& text) {
  std::map<NodeId, Point> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    NodeId id;
    Point p;
    if (!(ls >> id)) continue;
    if (!(ls >> p.x >> p.y)) throw ParseError(lineno, "expected `node_id x y`");
    out[id] = p;
  }
  return out;
}

/// Independent uniform integer draws L_i in [l_lo, l_hi], U_i in [u_lo, u_hi].
inline ConstraintSet assign_constraints(const Topology& topo, std::pair<Slot, Slot> l_range,
                                        std::pair<Slot, Slot> u_range, std::uint64_t seed) {
  if (l_range.first < 1 || l_range.first > l_range.second || u_range.first < 1 || u_range.first > u_range.second)
    throw std::domain_error("assign_constraints: invalid ranges");
  Rng rng(seed);
  ConstraintSet c;
  for (NodeId v : topo.nodes()) {
    const Slot l = uniform_int(rng, l_range.first, l_range.second);
    const Slot u = uniform_int(rng, u_range.first, u_range.second);
    c.set(v, l, u);
  }
  return c;
}

/// Hop distances from `source`; unreachable nodes are absent.
inline std::map<NodeId, int> bfs_distances(const Topology& topo, NodeId source) {
  std::vector<int> dist(topo.node_count(), -1);
  std::deque<NodeId> q{source};
  dist[topo.index(source)] = 0;
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop_front();
    for (NodeId v : topo.neighbors(u)) {
      auto& d = dist[topo.index(v)];
      if (d < 0) {
        d = dist[topo.index(u)] + 1;
        q.push_back(v);
      }
    }
  }
  std::map<NodeId, int> out;
  for (NodeId v : topo.nodes())
    if (dist[topo.index(v)] >= 0) out[v] = dist[topo.index(v)];
  return out;
}

inline std::vector<NodeId> unreachable_from(const Topology& topo, NodeId source) {
  auto d = bfs_distances(topo, source);
  std::vector<NodeId> out;
  for (NodeId v : topo.nodes())
    if (!d.count(v)) out.push_back(v);
  return out;
}

inline bool is_connected(const Topology& topo) {
  return topo.node_count() == 0 || unreachable_from(topo, topo.nodes().front()).empty();
}

inline void require_connected(const Topology& topo) {
  if (topo.node_count() == 0) throw std::domain_error("empty topology");
  auto missing = unreachable_from(topo, topo.nodes().front());
  if (!missing.empty()) throw DisconnectedError(std::move(missing));
}

inline int eccentricity(const Topology& topo, NodeId v) {
  auto d = bfs_distances(topo, v);
  if (d.size() != topo.node_count()) throw DisconnectedError(unreachable_from(topo, v));
  int e = 0;
  for (auto& [_, h] : d) e = std::max(e, h);
  return e;
}

/// Longest shortest-path hop distance (all-pairs BFS).
inline int diameter(const Topology& topo) {
  require_connected(topo);
  int best = 0;
  for (NodeId v : topo.nodes()) best = std::max(best, eccentricity(topo, v));
  return best;
}

/// Routes toward a single sink along a BFS tree, plus optional deadlines.
struct RouteSet {
  NodeId sink = 0;
  std::map<NodeId, NodeId> parent;  // absent for the sink
  std::map<NodeId, int> hops;
  std::map<NodeId, Slot> deadline;  // eta_i

  /// Path from `v` to the sink, both ends included.
  std::vector<NodeId> path(NodeId v) const {
    std::vector<NodeId> p{v};
    while (p.back() != sink) p.push_back(parent.at(p.back()));
    return p;
  }

  /// Forwarding nodes of R_v: the path without the sink, so size == hops.
  std::vector<NodeId> members(NodeId v) const {
    auto p = path(v);
    p.pop_back();
    return p;
  }

  int length(NodeId v) const { return hops.at(v); }

  /// F_v: origins whose routes pass through v.
  std::vector<NodeId> through(NodeId v) const {
    std::vector<NodeId> out;
    for (auto& [origin, _] : hops) {
      if (origin == sink) continue;
      for (NodeId x = origin; x != sink; x = parent.at(x))
        if (x == v) {
          out.push_back(origin);
          break;
        }
    }
    return out;
  }

  std::vector<NodeId> sources() const {
    std::vector<NodeId> out;
    for (auto& [v, _] : hops)
      if (v != sink) out.push_back(v);
    return out;
  }
};

/// BFS tree rooted at `sink`; parents are first discoverers in neighbor order.
inline RouteSet shortest_path_tree(const Topology& topo, NodeId sink) {
  auto missing = unreachable_from(topo, sink);
  if (!missing.empty()) throw DisconnectedError(std::move(missing));
  RouteSet r;
  r.sink = sink;
  r.hops[sink] = 0;
  std::deque<NodeId> q{sink};
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop_front();
    for (NodeId v : topo.neighbors(u)) {
      if (r.hops.count(v)) continue;
      r.hops[v] = r.hops[u] + 1;
      r.parent[v] = u;
      q.push_back(v);
    }
  }
  return r;
}

/// Node closest to (x, y); requires positions.
inline NodeId nearest_node(const Topology& topo, Point target) {
  if (!topo.has_positions()) throw std::domain_error("topology has no positions");
  NodeId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [id, p] : topo.positions()) {
    const double d = std::hypot(p.x - target.x, p.y - target.y);
    if (d < best_d) {
      best_d = d;
      best = id;
    }
  }
  return best;
}

}  // namespace wakeup
