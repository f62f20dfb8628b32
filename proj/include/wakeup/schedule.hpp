#pragma once

// Wake-up schedule model: per-node (A_i, n_i) laws, rendezvous sets,
// feasibility/tightness verification and network metrics.

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "constraints.hpp"
#include "numtheory.hpp"
#include "topology.hpp"

namespace wakeup {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Rounds to `digits` fractional digits (half away from zero) using exact arithmetic.
inline std::string to_decimal(const Rational& r, int digits = 6) {
  BigInt scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  BigInt num = boost::multiprecision::numerator(r) * scale;
  BigInt den = boost::multiprecision::denominator(r);
  const bool neg = num < 0;
  if (neg) num = -num;
  BigInt q = (2 * num + den) / (2 * den);
  std::string s = q.str();
  if (digits > 0) {
    if (s.size() <= static_cast<std::size_t>(digits)) s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
    s.insert(s.size() - static_cast<std::size_t>(digits), ".");
  }
  return (neg && q != 0 ? "-" : "") + s;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// One node's wake-up law S(i) = (A_i, n_i).
///
/// `phases` are residues in [0, period) of absolute wake epochs on the common
/// time axis, kept sorted. `neighbor_phase[j]` is a_ij, the phase node i uses
/// to meet neighbor j; every mapped value is a member of `phases`.
struct NodeSchedule {
  NodeId node = 0;
  Slot period = 1;
  Slot origin = 0;
  std::vector<Slot> phases;
  std::map<NodeId, Slot> neighbor_phase;

  bool awake(Slot t) const {
    const Slot r = static_cast<Slot>(mod_floor(t, period));
    return std::binary_search(phases.begin(), phases.end(), r);
  }

  /// Throws std::domain_error if the structural invariants are broken.
  void validate() const {
    if (period < 1) throw std::domain_error("node " + std::to_string(node) + ": period must be positive");
    if (origin < 0) throw std::domain_error("node " + std::to_string(node) + ": origin must be non-negative");
    if (phases.empty()) throw std::domain_error("node " + std::to_string(node) + ": empty phase set");
    for (std::size_t k = 0; k < phases.size(); ++k) {
      if (phases[k] < 0 || phases[k] >= period)
        throw std::domain_error("node " + std::to_string(node) + ": phase out of [0, period)");
      if (k > 0 && phases[k] <= phases[k - 1])
        throw std::domain_error("node " + std::to_string(node) + ": phases must be sorted and distinct");
    }
    for (auto& [j, a] : neighbor_phase)
      if (!std::binary_search(phases.begin(), phases.end(), a))
        throw std::domain_error("node " + std::to_string(node) + ": phase toward " + std::to_string(j) +
                                " is not in its phase set");
  }

  friend bool operator==(const NodeSchedule&, const NodeSchedule&) = default;
};

/// Single-phase node: A_i = {phase mod period}, every neighbor met on it.
inline NodeSchedule single_phase(NodeId node, Slot period, Slot phase, const std::vector<NodeId>& neighbors = {}) {
  NodeSchedule s;
  s.node = node;
  s.period = period;
  s.origin = phase < 0 ? 0 : phase;
  const Slot r = static_cast<Slot>(mod_floor(phase, period));
  s.phases = {r};
  for (NodeId j : neighbors) s.neighbor_phase[j] = r;
  return s;
}

using Schedule = std::map<NodeId, NodeSchedule>;

/// Meeting times of two neighbors: `offsets` (sorted, in [0, hyperperiod))
/// repeat with period `hyperperiod`. Empty offsets means they never meet.
struct Rendezvous {
  Slot hyperperiod = 0;
  std::vector<Slot> offsets;

  bool never() const { return offsets.empty(); }
  Slot first() const { return offsets.at(0); }
  Slot step() const { return hyperperiod; }

  friend bool operator==(const Rendezvous&, const Rendezvous&) = default;
};

inline Rendezvous rendezvous(const NodeSchedule& si, const NodeSchedule& sj) {
  Rendezvous r;
  r.hyperperiod = narrow(lcm(si.period, sj.period));
  std::set<Slot> offsets;
  for (Slot a : si.phases)
    for (Slot b : sj.phases)
      if (auto sol = crt_pair(a, si.period, b, sj.period)) offsets.insert(narrow(sol->x0));
  r.offsets.assign(offsets.begin(), offsets.end());
  return r;
}

/// Smallest meeting time >= t.
inline std::optional<Slot> next_rendezvous(const Rendezvous& r, Slot t) {
  if (r.never()) return std::nullopt;
  const Slot h = r.hyperperiod;
  const Slot base = t - static_cast<Slot>(mod_floor(t, h));
  const Slot within = t - base;
  auto it = std::lower_bound(r.offsets.begin(), r.offsets.end(), within);
  if (it != r.offsets.end()) return base + *it;
  return base + h + r.offsets.front();
}

/// Largest distance between consecutive meeting times.
inline std::optional<Slot> max_gap(const Rendezvous& r) {
  if (r.never()) return std::nullopt;
  Slot gap = r.offsets.front() + r.hyperperiod - r.offsets.back();
  for (std::size_t k = 1; k < r.offsets.size(); ++k) gap = std::max(gap, r.offsets[k] - r.offsets[k - 1]);
  return gap;
}

/// One directed delay constraint (i toward j): max gap vs U_i.
struct EdgeCheck {
  NodeId from = 0;
  NodeId to = 0;
  std::optional<Slot> gap;  // empty: never meet
  Slot bound = 0;
  bool violated = false;
};

struct ScheduleReport {
  bool feasible = false;
  bool strictly = false;
  bool tight = false;
  bool energy_ok = false;      // every node satisfies n_i >= L_i |A_i|
  bool all_edges_meet = false; // every edge has infinitely many rendezvous
  Rational duty_cycle;
  Rational delay_drift;
  Rational violation_percentage;  // fraction in [0, 1]
  Rational violation_magnitude;   // mean excess gap over violated constraints
  std::vector<NodeId> energy_violations;
  std::vector<EdgeCheck> constraints;
  std::size_t checks = 0;  // directed constraints examined
};

inline void require_covers(const Schedule& s, const Topology& topo) {
  if (s.size() != topo.node_count()) throw std::domain_error("schedule does not cover the topology");
  for (NodeId v : topo.nodes()) {
    auto it = s.find(v);
    if (it == s.end()) throw std::domain_error("schedule has no entry for node " + std::to_string(v));
    if (it->second.node != v) throw std::domain_error("schedule entry keyed by wrong node id");
  }
}

/// Average of |A_i| / n_i.
inline Rational duty_cycle(const Schedule& s) {
  if (s.empty()) return Rational(0);
  Rational sum = 0;
  for (auto& [_, ns] : s) sum += Rational(static_cast<long long>(ns.phases.size()), ns.period);
  return sum / static_cast<long long>(s.size());
}

/// (1 / 2M) * sum_i sum_{j in Ng(i)} [n_i, n_j] / U_i.
inline Rational delay_drift(const Schedule& s, const Topology& topo, const ConstraintSet& c) {
  require_covers(s, topo);
  if (topo.edge_count() == 0) return Rational(0);
  Rational sum = 0;
  for (NodeId i : topo.nodes()) {
    BigInt acc = 0;
    for (NodeId j : topo.neighbors(i)) acc += static_cast<long long>(narrow(lcm(s.at(i).period, s.at(j).period)));
    sum += Rational(acc, BigInt(c.upper(i)));
  }
  return sum / static_cast<long long>(2 * topo.edge_count());
}

namespace detail {

inline std::vector<EdgeCheck> directed_checks(const Schedule& s, const Topology& topo, const ConstraintSet& c,
                                              std::size_t* counter = nullptr) {
  std::vector<EdgeCheck> out;
  out.reserve(2 * topo.edge_count());
  for (auto [u, v] : topo.edges()) {
    const auto r = rendezvous(s.at(u), s.at(v));
    const auto gap = max_gap(r);
    for (auto [a, b] : {std::pair{u, v}, std::pair{v, u}}) {
      EdgeCheck e{a, b, gap, c.upper(a), false};
      e.violated = gap && *gap > e.bound;
      out.push_back(e);
      if (counter) ++*counter;
    }
  }
  return out;
}

inline std::pair<Rational, Rational> summarize_violations(const std::vector<EdgeCheck>& checks) {
  if (checks.empty()) return {Rational(0), Rational(0)};
  long long violated = 0;
  BigInt excess = 0;
  for (auto& e : checks)
    if (e.violated) {
      ++violated;
      excess += static_cast<long long>(*e.gap - e.bound);
    }
  Rational pct(violated, static_cast<long long>(checks.size()));
  Rational mag = violated ? Rational(excess, BigInt(violated)) : Rational(0);
  return {pct, mag};
}

}  // namespace detail

/// Fraction of the 2M directed constraints whose max gap exceeds U_i, and
/// the mean excess (gap - U_i) over those constraints (0 when none).
/// Edges that never meet carry no gap and are not counted as violations.
inline std::pair<Rational, Rational> violations(const Schedule& s, const Topology& topo, const ConstraintSet& c) {
  require_covers(s, topo);
  return detail::summarize_violations(detail::directed_checks(s, topo, c));
}

inline ScheduleReport verify(const Schedule& s, const Topology& topo, const ConstraintSet& c) {
  require_covers(s, topo);
  ScheduleReport rep;
  rep.energy_ok = true;
  bool single = true;
  for (NodeId v : topo.nodes()) {
    const auto& ns = s.at(v);
    ns.validate();
    if (ns.period < c.lower(v) * static_cast<Slot>(ns.phases.size())) {
      rep.energy_ok = false;
      rep.energy_violations.push_back(v);
    }
    single = single && ns.phases.size() == 1;
  }
  rep.constraints = detail::directed_checks(s, topo, c, &rep.checks);
  rep.all_edges_meet = std::all_of(rep.constraints.begin(), rep.constraints.end(),
                                   [](const EdgeCheck& e) { return e.gap.has_value(); });
  rep.feasible = rep.all_edges_meet && rep.energy_ok;
  rep.tight = rep.feasible && std::none_of(rep.constraints.begin(), rep.constraints.end(),
                                           [](const EdgeCheck& e) { return e.violated; });
  rep.strictly = rep.feasible && single;
  rep.duty_cycle = duty_cycle(s);
  rep.delay_drift = delay_drift(s, topo, c);
  std::tie(rep.violation_percentage, rep.violation_magnitude) = detail::summarize_violations(rep.constraints);
  return rep;
}

/// Nodes whose U_i is below 1 + max_{j in Ng(i)} L_j.
inline std::vector<NodeId> constraint_warnings(const Topology& topo, const ConstraintSet& c) {
  std::vector<NodeId> out;
  for (NodeId i : topo.nodes()) {
    Slot worst = 0;
    for (NodeId j : topo.neighbors(i)) worst = std::max(worst, c.lower(j));
    if (!topo.neighbors(i).empty() && c.upper(i) < worst + 1) out.push_back(i);
  }
  return out;
}

/// Checks that the phase difference a_ij - a_ji modulo (n_i, n_j), taken on
/// the common axis, equals the one rebuilt from local offsets
/// Delta_ij = a_ij - alpha_i, Delta_ji = a_ji - alpha_j and the measured
/// clock offset alpha_j - alpha_i.
inline bool local_phase_identity(Slot alpha_i, Slot alpha_j, Slot a_ij, Slot a_ji, Slot n_i, Slot n_j) {
  const wide g = gcd(n_i, n_j);
  const wide delta_ij = static_cast<wide>(a_ij) - alpha_i;
  const wide delta_ji = static_cast<wide>(a_ji) - alpha_j;
  const wide clock_offset = static_cast<wide>(alpha_j) - alpha_i;
  const wide common = mod_floor(static_cast<wide>(a_ij) - a_ji, g);
  const wide local = mod_floor(mod_floor(delta_ij - delta_ji, g) - mod_floor(clock_offset, g), g);
  return common == local;
}

/// Link weight [n_i, n_j] (rendezvous period of a single-phase edge).
inline Slot edge_weight(const Schedule& s, NodeId i, NodeId j) { return narrow(lcm(s.at(i).period, s.at(j).period)); }

/// Two-node instance whose strictly tight schedules expose a proper factor
/// of R: L = (2, R), U = (R - 1, R).
inline std::pair<Topology, ConstraintSet> build_reduction_instance(Slot r) {
  if (r < 4) throw std::domain_error("build_reduction_instance: R must be >= 4");
  Topology topo({1, 2}, {{1, 2}});
  ConstraintSet c;
  c.set(1, 2, r - 1);
  c.set(2, r, r);
  return {topo, c};
}

class SearchGuardError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Exhaustive search for a strictly tight schedule (single phase per node).
///
/// Periods range over [L_i, U_i] and phases over [0, n_i). The first node's
/// phase is pinned to 0: shifting every phase by the same amount preserves
/// all rendezvous gaps. Guarded to at most 4 nodes and ~2^40 candidates.
inline std::optional<Schedule> brute_force_solve(const Topology& topo, const ConstraintSet& c) {
  const auto& nodes = topo.nodes();
  if (nodes.empty()) return Schedule{};
  if (nodes.size() > 4) throw SearchGuardError("brute_force_solve: more than 4 nodes");
  long double space = 1;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& b = c.at(nodes[k]);
    if (b.lower > b.upper) return std::nullopt;
    space *= static_cast<long double>(b.upper - b.lower + 1);
    if (k > 0) space *= static_cast<long double>(b.upper);
  }
  if (space > 1.1e12L) throw SearchGuardError("brute_force_solve: search space too large");

  const std::size_t n = nodes.size();
  std::vector<Slot> period(n), phase(n);
  std::vector<std::vector<std::size_t>> earlier(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t m = 0; m < k; ++m)
      if (topo.has_edge(nodes[k], nodes[m])) earlier[k].push_back(m);

  std::function<bool(std::size_t)> place_phase = [&](std::size_t k) -> bool {
    if (k == n) return true;
    const Slot lo = 0, hi = k == 0 ? 0 : period[k] - 1;
    for (Slot a = lo; a <= hi; ++a) {
      bool ok = true;
      for (auto m : earlier[k])
        if ((a - phase[m]) % static_cast<Slot>(gcd(period[k], period[m])) != 0) {
          ok = false;
          break;
        }
      if (!ok) continue;
      phase[k] = a;
      if (place_phase(k + 1)) return true;
    }
    return false;
  };

  std::function<bool(std::size_t)> place_period = [&](std::size_t k) -> bool {
    if (k == n) return place_phase(0);
    const auto& b = c.at(nodes[k]);
    for (Slot p = b.lower; p <= b.upper; ++p) {
      bool ok = true;
      for (auto m : earlier[k]) {
        const Slot l = narrow(lcm(p, period[m]));
        if (l > b.upper || l > c.upper(nodes[m])) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      period[k] = p;
      if (place_period(k + 1)) return true;
    }
    return false;
  };

  if (!place_period(0)) return std::nullopt;
  Schedule s;
  for (std::size_t k = 0; k < n; ++k) s[nodes[k]] = single_phase(nodes[k], period[k], phase[k], topo.neighbors(nodes[k]));
  return s;
}

// ---------------------------------------------------------------------------
// Text form: `node_id period origin phase[,phase...] [neighbor:phase ...]`

inline std::string serialize(const Schedule& s) {
  std::string out;
  for (auto& [id, ns] : s) {
    out += std::to_string(id) + " " + std::to_string(ns.period) + " " + std::to_string(ns.origin) + " ";
    for (std::size_t k = 0; k < ns.phases.size(); ++k) out += (k ? "," : "") + std::to_string(ns.phases[k]);
    for (auto& [j, a] : ns.neighbor_phase) out += " " + std::to_string(j) + ":" + std::to_string(a);
    out += "\n";
  }
  return out;
}

inline Schedule parse_schedule(const std::string& text) {
  Schedule s;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto to_int = [&](const std::string& tok) -> long long {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad integer `" + tok + "`");
    }
    if (used != tok.size()) throw ParseError(lineno, "bad integer `" + tok + "`");
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string id_tok, period_tok, origin_tok, phase_tok;
    if (!(ls >> id_tok)) continue;
    if (id_tok[0] == '#') continue;
    if (!(ls >> period_tok >> origin_tok >> phase_tok)) throw ParseError(lineno, "expected `node period origin phases`");
    NodeSchedule ns;
    ns.node = static_cast<NodeId>(to_int(id_tok));
    ns.period = to_int(period_tok);
    ns.origin = to_int(origin_tok);
    std::istringstream ps(phase_tok);
    std::string tok;
    while (std::getline(ps, tok, ',')) ns.phases.push_back(to_int(tok));
    std::sort(ns.phases.begin(), ns.phases.end());
    while (ls >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos) throw ParseError(lineno, "expected `neighbor:phase`");
      ns.neighbor_phase[static_cast<NodeId>(to_int(tok.substr(0, colon)))] = to_int(tok.substr(colon + 1));
    }
    try {
      ns.validate();
    } catch (const std::domain_error& e) {
      throw ParseError(lineno, e.what());
    }
    if (!s.emplace(ns.node, ns).second) throw ParseError(lineno, "duplicate node " + std::to_string(ns.node));
  }
  return s;
}

}  // namespace wakeup
