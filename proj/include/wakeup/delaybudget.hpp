#pragma once

// Splitting end-to-end route deadlines into per-node gap bounds U_i.

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "constraints.hpp"
#include "schedule.hpp"
#include "topology.hpp"

namespace wakeup {

struct BudgetProblem {
  RouteSet routes;            // R_i = routes.members(i), sink excluded
  std::map<NodeId, Slot> L;   // energy bound per forwarding node
  std::map<NodeId, Slot> eta; // deadline of the route starting at each node
};

struct BudgetSolution {
  std::map<NodeId, Slot> U;
  std::map<NodeId, Rational> exact;  // unfloored value of the uniform split
  std::map<NodeId, NodeId> binding;  // origin of the route giving the minimum
};

namespace detail {

inline Slot route_floor(const BudgetProblem& p, NodeId origin) {
  Slot sum = p.routes.length(origin);
  for (NodeId j : p.routes.members(origin)) sum += p.L.at(j);
  return sum;
}

}  // namespace detail

/// |R_i| + sum of L over R_i <= eta_i for every route.
inline bool check_feasible(const BudgetProblem& p) {
  for (NodeId i : p.routes.sources())
    if (detail::route_floor(p, i) > p.eta.at(i)) return false;
  return true;
}

/// Every inequality of the route system: U_j >= L_j + 1 and each route's
/// sum of U within its deadline.
inline bool satisfies_system(const BudgetProblem& p, const std::map<NodeId, Slot>& U) {
  for (NodeId i : p.routes.sources()) {
    if (U.at(i) < p.L.at(i) + 1) return false;
    Slot sum = 0;
    for (NodeId j : p.routes.members(i)) sum += U.at(j);
    if (sum > p.eta.at(i)) return false;
  }
  return true;
}

/// U_i = L_i + 1 + min over routes R_j through i of the per-hop share of the
/// slack eta_j - |R_j| - sum L. Floored to whole slots.
inline std::optional<BudgetSolution> assign_uniform(const BudgetProblem& p) {
  if (!check_feasible(p)) return std::nullopt;
  BudgetSolution sol;
  std::map<NodeId, Rational> share;
  for (NodeId j : p.routes.sources())
    share[j] = Rational(p.eta.at(j) - detail::route_floor(p, j), p.routes.length(j));
  for (NodeId i : p.routes.sources()) {
    std::optional<NodeId> best;
    for (NodeId j : p.routes.through(i))
      if (!best || share[j] < share[*best]) best = j;
    const Rational u = Rational(p.L.at(i) + 1) + share[*best];
    sol.exact[i] = u;
    sol.binding[i] = *best;
    const BigInt q = boost::multiprecision::numerator(u) / boost::multiprecision::denominator(u);
    sol.U[i] = q.convert_to<Slot>();
  }
  return sol;
}

/// Uniform L and eta: U = eta / longest route through the node, floored.
inline Slot uniform_special_case(Slot eta, int max_route_len) {
  if (max_route_len < 1) throw std::domain_error("uniform_special_case: route length must be >= 1");
  return eta / max_route_len;
}

/// Worst per-hop delay floor ceil(n / k) + 1.
inline Slot hop_delay_lower_bound(Slot n, Slot k) {
  if (n < 1 || k < 1) throw std::domain_error("hop_delay_lower_bound: arguments must be positive");
  return (n + k - 1) / k + 1;
}

/// Uniform-parameter problem over a routing tree.
inline BudgetProblem uniform_problem(const RouteSet& routes, Slot L, Slot eta) {
  BudgetProblem p;
  p.routes = routes;
  for (NodeId v : routes.sources()) {
    p.L[v] = L;
    p.eta[v] = eta;
  }
  return p;
}

/// CSV `node,L,U,slack_route`; the sink has no row.
inline std::string budget_csv(const BudgetProblem& p, const BudgetSolution& s) {
  std::string out = "node,L,U,slack_route\n";
  for (auto& [v, u] : s.U)
    out += std::to_string(v) + "," + std::to_string(p.L.at(v)) + "," + std::to_string(u) + "," +
           std::to_string(s.binding.at(v)) + "\n";
  return out;
}

}  // namespace wakeup
