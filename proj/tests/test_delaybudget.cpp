#include <gtest/gtest.h>

#include <functional>

#include "wakeup/delaybudget.hpp"

using namespace wakeup;

namespace {

Topology chain(int n) {
  std::vector<NodeId> ids;
  std::vector<Edge> e;
  for (int i = 1; i <= n; ++i) {
    ids.push_back(i);
    if (i > 1) e.emplace_back(i - 1, i);
  }
  return Topology(ids, e);
}

// Random labelled tree: node k attaches to a uniform earlier node.
Topology random_tree(int n, Rng& rng) {
  std::vector<NodeId> ids{1};
  std::vector<Edge> e;
  for (int k = 2; k <= n; ++k) {
    ids.push_back(k);
    e.emplace_back(static_cast<NodeId>(uniform_int(rng, 1, k - 1)), k);
  }
  return Topology(ids, e);
}

// Direct reading of the system: U_j >= L_j + 1, and per route sum U <= eta.
bool system_holds(const BudgetProblem& p, const std::map<NodeId, Slot>& U) {
  for (NodeId i : p.routes.sources()) {
    if (U.at(i) < p.L.at(i) + 1) return false;
    Slot sum = 0;
    for (NodeId x = i; x != p.routes.sink; x = p.routes.parent.at(x)) sum += U.at(x);
    if (sum > p.eta.at(i)) return false;
  }
  return true;
}

bool exists_assignment(const BudgetProblem& p, Slot cap) {
  const auto src = p.routes.sources();
  std::map<NodeId, Slot> U;
  std::function<bool(std::size_t)> rec = [&](std::size_t k) {
    if (k == src.size()) return system_holds(p, U);
    for (Slot u = p.L.at(src[k]) + 1; u <= cap; ++u) {
      U[src[k]] = u;
      if (rec(k + 1)) return true;
    }
    return false;
  };
  return rec(0);
}

}  // namespace

TEST(CheckFeasible, Examples) {
  auto routes = shortest_path_tree(chain(3), 1);
  auto p = uniform_problem(routes, 2, 30);
  EXPECT_TRUE(check_feasible(p));

  auto one = shortest_path_tree(chain(2), 1);
  EXPECT_FALSE(check_feasible(uniform_problem(one, 5, 5)));
  EXPECT_TRUE(check_feasible(uniform_problem(one, 5, 6)));

  // boundary: eta equal to |R| + sum L on the longest route
  EXPECT_TRUE(check_feasible(uniform_problem(routes, 2, 6)));
  EXPECT_FALSE(check_feasible(uniform_problem(routes, 2, 5)));
}

TEST(AssignUniform, DepthFiveChain) {
  auto p = uniform_problem(shortest_path_tree(chain(6), 1), 2, 30);
  auto s = assign_uniform(p);
  ASSERT_TRUE(s);
  for (NodeId v = 2; v <= 6; ++v) EXPECT_EQ(s->U.at(v), 6) << v;
  EXPECT_TRUE(satisfies_system(p, s->U));
  EXPECT_EQ(s->binding.at(2), 6);
}

TEST(AssignUniform, InfeasibleGivesNothing) {
  EXPECT_FALSE(assign_uniform(uniform_problem(shortest_path_tree(chain(4), 1), 5, 10)));
}

TEST(AssignUniform, SharedNodeTakesSmallestSlack) {
  // 1 is the sink; 2 forwards for 3 and 4
  Topology t({1, 2, 3, 4}, {{1, 2}, {2, 3}, {2, 4}});
  BudgetProblem p;
  p.routes = shortest_path_tree(t, 1);
  p.L = {{2, 2}, {3, 1}, {4, 3}};
  p.eta = {{2, 40}, {3, 12}, {4, 30}};
  auto s = assign_uniform(p);
  ASSERT_TRUE(s);
  // slack per hop: route 2 -> 37, route 3 -> (12-2-3)/2 = 7/2, route 4 -> (30-2-5)/2 = 23/2
  EXPECT_EQ(s->exact.at(2), Rational(13, 2));
  EXPECT_EQ(s->U.at(2), 6);
  EXPECT_EQ(s->binding.at(2), 3);
  EXPECT_EQ(s->U.at(3), 5);
  EXPECT_EQ(s->U.at(4), 15);
  EXPECT_TRUE(system_holds(p, s->U));
}

TEST(AssignUniform, RandomTreesSatisfySystem) {
  Rng rng(2024);
  int produced = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto t = random_tree(2 + static_cast<int>(uniform_int(rng, 0, 30)), rng);
    BudgetProblem p;
    p.routes = shortest_path_tree(t, 1);
    for (NodeId v : p.routes.sources()) {
      p.L[v] = uniform_int(rng, 1, 10);
      p.eta[v] = uniform_int(rng, 5, 200);
    }
    auto s = assign_uniform(p);
    ASSERT_EQ(s.has_value(), check_feasible(p));
    if (!s) continue;
    ++produced;
    ASSERT_TRUE(system_holds(p, s->U));
    ASSERT_TRUE(satisfies_system(p, s->U));
    for (auto& [v, u] : s->U) ASSERT_LE(Rational(u), s->exact.at(v));
  }
  EXPECT_GT(produced, 50);
}

TEST(AssignUniform, MatchesUniformSpecialCase) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    auto t = random_tree(2 + static_cast<int>(uniform_int(rng, 0, 20)), rng);
    auto routes = shortest_path_tree(t, 1);
    const Slot L = uniform_int(rng, 1, 4);
    int depth = 0;
    for (NodeId v : routes.sources()) depth = std::max(depth, routes.length(v));
    // eta a multiple of every route length keeps the closed form integral
    Slot lcm_len = 1;
    for (int k = 1; k <= depth; ++k) lcm_len = std::lcm(lcm_len, static_cast<Slot>(k));
    const Slot eta = lcm_len * ((L + 1) + uniform_int(rng, 0, 3));
    auto p = uniform_problem(routes, L, eta);
    auto s = assign_uniform(p);
    ASSERT_TRUE(s);
    for (NodeId v : routes.sources()) {
      int longest = 0;
      for (NodeId o : routes.through(v)) longest = std::max(longest, routes.length(o));
      ASSERT_EQ(s->U.at(v), uniform_special_case(eta, longest));
    }
  }
}

// Negative verdicts are confirmed by trying every integer assignment.
TEST(CheckFeasible, InfeasibleMeansNoAssignment) {
  Rng rng(31);
  int infeasible = 0;
  for (int trial = 0; trial < 400; ++trial) {
    auto t = random_tree(2 + static_cast<int>(uniform_int(rng, 0, 2)), rng);
    BudgetProblem p;
    p.routes = shortest_path_tree(t, 1);
    for (NodeId v : p.routes.sources()) {
      p.L[v] = uniform_int(rng, 1, 8);
      p.eta[v] = uniform_int(rng, 2, 20);
    }
    const bool ok = check_feasible(p);
    ASSERT_EQ(ok, exists_assignment(p, 20));
    infeasible += !ok;
  }
  EXPECT_GT(infeasible, 20);
}

TEST(UniformSpecialCase, Examples) {
  EXPECT_EQ(uniform_special_case(30, 5), 6);
  EXPECT_EQ(uniform_special_case(17, 1), 17);
  EXPECT_THROW(uniform_special_case(30, 0), std::domain_error);
}

TEST(HopDelayBound, Examples) {
  EXPECT_EQ(hop_delay_lower_bound(8, 1), 9);
  EXPECT_EQ(hop_delay_lower_bound(8, 2), 5);
  EXPECT_EQ(hop_delay_lower_bound(9, 2), 6);
  EXPECT_THROW(hop_delay_lower_bound(0, 1), std::domain_error);
}

TEST(BudgetCsv, Header) {
  auto p = uniform_problem(shortest_path_tree(chain(3), 1), 2, 30);
  auto s = assign_uniform(p);
  ASSERT_TRUE(s);
  EXPECT_EQ(budget_csv(p, *s), "node,L,U,slack_route\n2,2,15,3\n3,2,15,3\n");
}
