#include <gtest/gtest.h>

#include <random>
#include <set>

#include "wakeup/schedule.hpp"

using namespace wakeup;

namespace {

NodeSchedule node(NodeId id, Slot n, std::vector<Slot> phases, std::map<NodeId, Slot> nbr = {}) {
  NodeSchedule s;
  s.node = id;
  s.period = n;
  s.origin = phases.front();
  s.phases = std::move(phases);
  s.neighbor_phase = std::move(nbr);
  return s;
}

// Meeting slots found by stepping through [0, horizon).
std::vector<Slot> simulate_meetings(const NodeSchedule& a, const NodeSchedule& b, Slot horizon) {
  std::vector<Slot> out;
  for (Slot t = 0; t < horizon; ++t)
    if (a.awake(t) && b.awake(t)) out.push_back(t);
  return out;
}

bool composite(Slot r) {
  for (Slot d = 2; d * d <= r; ++d)
    if (r % d == 0) return true;
  return false;
}

Topology pair_topo() { return Topology({1, 2}, {{1, 2}}); }

}  // namespace

TEST(Rendezvous, ElevenFifteenPair) {
  const auto r = rendezvous(single_phase(1, 5, 1), single_phase(2, 3, 2));
  ASSERT_FALSE(r.never());
  EXPECT_EQ(r.first(), 11);
  EXPECT_EQ(r.step(), 15);
  EXPECT_EQ(next_rendezvous(r, 0), 11);
  EXPECT_EQ(next_rendezvous(r, 12), 26);
  EXPECT_EQ(max_gap(r), 15);
}

TEST(Rendezvous, IdenticalAndDisjoint) {
  auto r = rendezvous(single_phase(1, 4, 0), single_phase(2, 4, 0));
  EXPECT_EQ(r.first(), 0);
  EXPECT_EQ(r.step(), 4);
  r = rendezvous(single_phase(1, 4, 0), single_phase(2, 8, 2));
  EXPECT_TRUE(r.never());
  EXPECT_FALSE(next_rendezvous(r, 5));
  EXPECT_FALSE(max_gap(r));
}

TEST(MaxGap, OffsetListIncludesWrap) {
  Rendezvous r{8, {0, 3}};
  EXPECT_EQ(max_gap(r), 5);
  EXPECT_EQ(next_rendezvous(r, 4), 8);
  EXPECT_EQ(next_rendezvous(r, 9), 11);
}

// Empty-or-infinite, and equal to the slot-by-slot meeting set.
TEST(Rendezvous, DichotomyAgainstSimulation) {
  for (Slot ni = 1; ni <= 20; ++ni)
    for (Slot nj = 1; nj <= 20; ++nj) {
      const Slot h = ni * nj / std::__gcd(ni, nj);
      for (Slot a = 0; a < ni; ++a)
        for (Slot b = 0; b < nj; ++b) {
          const auto si = single_phase(1, ni, a), sj = single_phase(2, nj, b);
          const auto r = rendezvous(si, sj);
          const auto seen = simulate_meetings(si, sj, 2 * h);
          if (r.never()) {
            ASSERT_TRUE(seen.empty());
            continue;
          }
          ASSERT_EQ(r.step(), h);
          ASSERT_EQ(max_gap(r), h);
          std::vector<Slot> want;
          for (Slot x = r.first(); x < 2 * h; x += r.step()) want.push_back(x);
          ASSERT_EQ(seen, want) << ni << " " << nj << " " << a << " " << b;
        }
    }
}

TEST(Rendezvous, MultiPhaseMatchesSimulation) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 2000; ++trial) {
    const Slot ni = 1 + rng() % 16, nj = 1 + rng() % 16;
    std::set<Slot> pa, pb;
    for (int k = 0; k < 3; ++k) {
      pa.insert(rng() % ni);
      pb.insert(rng() % nj);
    }
    const auto si = node(1, ni, {pa.begin(), pa.end()}), sj = node(2, nj, {pb.begin(), pb.end()});
    const auto r = rendezvous(si, sj);
    const auto seen = simulate_meetings(si, sj, 3 * r.hyperperiod);
    ASSERT_EQ(r.never(), seen.empty());
    if (seen.empty()) continue;
    Slot gap = 0;
    for (std::size_t k = 1; k < seen.size(); ++k) gap = std::max(gap, seen[k] - seen[k - 1]);
    ASSERT_EQ(max_gap(r), gap);
    for (Slot t = 0; t < 2 * r.hyperperiod; ++t)
      ASSERT_EQ(next_rendezvous(r, t), *std::lower_bound(seen.begin(), seen.end(), t));
  }
}

TEST(Verify, CoprimePairIsFeasible) {
  ConstraintSet c;
  c.set(1, 1, 100);
  c.set(2, 1, 100);
  for (Slot a = 0; a < 5; ++a)
    for (Slot b = 0; b < 7; ++b) {
      Schedule s{{1, single_phase(1, 5, a, {2})}, {2, single_phase(2, 7, b, {1})}};
      const auto rep = verify(s, pair_topo(), c);
      EXPECT_TRUE(rep.feasible);
      EXPECT_TRUE(rep.strictly);
      EXPECT_TRUE(rep.tight);
    }
}

TEST(Verify, GapAboveBoundIsNotTight) {
  ConstraintSet c;
  c.set(1, 2, 10);
  c.set(2, 2, 20);
  Schedule s{{1, single_phase(1, 16, 0, {2})}, {2, single_phase(2, 16, 0, {1})}};
  const auto rep = verify(s, pair_topo(), c);
  EXPECT_TRUE(rep.feasible);
  EXPECT_FALSE(rep.tight);
  EXPECT_EQ(rep.checks, 2u);
  const auto flagged = std::count_if(rep.constraints.begin(), rep.constraints.end(), [](auto& e) { return e.violated; });
  EXPECT_EQ(flagged, 1);
  EXPECT_EQ(rep.violation_percentage, Rational(1, 2));
  EXPECT_EQ(rep.violation_magnitude, 6);
}

TEST(Verify, EnergyBreachIsInfeasible) {
  ConstraintSet c;
  c.set(1, 5, 40);
  c.set(2, 1, 40);
  Schedule s{{1, node(1, 8, {0, 4}, {{2, 0}})}, {2, single_phase(2, 4, 0, {1})}};
  const auto rep = verify(s, pair_topo(), c);
  EXPECT_TRUE(rep.all_edges_meet);
  EXPECT_FALSE(rep.energy_ok);
  EXPECT_FALSE(rep.feasible);
  EXPECT_FALSE(rep.tight);
  EXPECT_EQ(rep.energy_violations, std::vector<NodeId>{1});
}

TEST(Verify, MismatchedScheduleIsRejected) {
  ConstraintSet c;
  c.set(1, 1, 4);
  c.set(2, 1, 4);
  Schedule s{{1, single_phase(1, 4, 0, {2})}};
  EXPECT_THROW(verify(s, pair_topo(), c), std::domain_error);
}

TEST(Verify, RandomSchedulesRespectImplications) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 6);
    std::vector<NodeId> ids;
    for (int i = 1; i <= n; ++i) ids.push_back(i);
    std::vector<Edge> edges;
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j)
        if (j == i + 1 || rng() % 3 == 0) edges.emplace_back(i, j);
    Topology topo(ids, edges);
    ConstraintSet c;
    Schedule s;
    for (NodeId v : ids) {
      c.set(v, 1 + rng() % 4, 4 + rng() % 30);
      const Slot per = 1 + rng() % 12;
      std::set<Slot> ph{static_cast<Slot>(rng() % per)};
      if (rng() % 3 == 0) ph.insert(rng() % per);
      auto ns = node(v, per, {ph.begin(), ph.end()});
      for (NodeId j : topo.neighbors(v)) ns.neighbor_phase[j] = *ph.begin();
      s[v] = ns;
    }
    const auto rep = verify(s, topo, c);
    if (rep.tight) { ASSERT_TRUE(rep.feasible); }
    if (rep.strictly) {
      for (auto& [_, ns] : s) ASSERT_EQ(ns.phases.size(), 1u);
    }
    ASSERT_LE(rep.checks, 2 * topo.edge_count());
  }
}

TEST(DutyCycle, Examples) {
  Schedule s{{1, single_phase(1, 4, 0)}, {2, single_phase(2, 4, 1)}};
  EXPECT_EQ(duty_cycle(s), Rational(1, 4));
  s[2] = node(2, 8, {0, 3});
  EXPECT_EQ(duty_cycle(s), Rational(1, 4));
  Schedule on{{1, node(1, 3, {0, 1, 2})}};
  EXPECT_EQ(duty_cycle(on), 1);
}

TEST(DelayDrift, Examples) {
  ConstraintSet c;
  c.set(1, 1, 8);
  c.set(2, 1, 8);
  Schedule s{{1, single_phase(1, 4, 0, {2})}, {2, single_phase(2, 4, 0, {1})}};
  EXPECT_EQ(delay_drift(s, pair_topo(), c), Rational(1, 2));
  c.set(1, 1, 12);
  c.set(2, 1, 12);
  s[2] = single_phase(2, 6, 0, {1});
  EXPECT_EQ(delay_drift(s, pair_topo(), c), 1);

  Topology tri({1, 2, 3}, {{1, 2}, {2, 3}, {1, 3}});
  ConstraintSet ct;
  Schedule st;
  for (NodeId v : {1, 2, 3}) {
    ct.set(v, 1, 4);
    st[v] = single_phase(v, 2, 0, tri.neighbors(v));
  }
  EXPECT_EQ(delay_drift(st, tri, ct), Rational(1, 2));
}

// Same values whatever order the nodes are labelled in.
TEST(Metrics, IndependentOfNodeLabelling) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 6;
    std::vector<int> perm{1, 2, 3, 4, 5, 6};
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Edge> e1, e2;
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j)
        if (j == i + 1 || rng() % 2) {
          e1.emplace_back(i, j);
          e2.emplace_back(perm[i - 1], perm[j - 1]);
        }
    Topology t1({1, 2, 3, 4, 5, 6}, e1), t2({1, 2, 3, 4, 5, 6}, e2);
    ConstraintSet c1, c2;
    Schedule s1, s2;
    for (int v = 1; v <= n; ++v) {
      const Slot u = 5 + rng() % 40, per = 1 + rng() % 16;
      c1.set(v, 1, u);
      c2.set(perm[v - 1], 1, u);
      s1[v] = single_phase(v, per, 0, t1.neighbors(v));
      s2[perm[v - 1]] = single_phase(perm[v - 1], per, 0, t2.neighbors(perm[v - 1]));
    }
    ASSERT_EQ(duty_cycle(s1), duty_cycle(s2));
    ASSERT_EQ(delay_drift(s1, t1, c1), delay_drift(s2, t2, c2));
    ASSERT_EQ(violations(s1, t1, c1), violations(s2, t2, c2));
  }
}

TEST(Violations, NoneWhenEveryLcmFits) {
  Topology path({1, 2, 3}, {{1, 2}, {2, 3}});
  ConstraintSet c;
  Schedule s;
  for (NodeId v : {1, 2, 3}) {
    c.set(v, 1, 16);
    s[v] = single_phase(v, v == 2 ? 8 : 16, 3, path.neighbors(v));
  }
  const auto [pct, mag] = violations(s, path, c);
  EXPECT_EQ(pct, 0);
  EXPECT_EQ(mag, 0);
}

TEST(Violations, OneOfFour) {
  Topology path({1, 2, 3}, {{1, 2}, {2, 3}});
  ConstraintSet c;
  c.set(1, 1, 10);
  c.set(2, 1, 16);
  c.set(3, 1, 16);
  Schedule s;
  for (NodeId v : {1, 2, 3}) s[v] = single_phase(v, 16, 0, path.neighbors(v));
  const auto [pct, mag] = violations(s, path, c);
  EXPECT_EQ(pct, Rational(1, 4));
  EXPECT_EQ(mag, 6);
}

TEST(LocalPhase, Identity) {
  EXPECT_TRUE(local_phase_identity(1, 2, 1, 2, 5, 3));
  EXPECT_TRUE(local_phase_identity(4, 4, 0, 7, 6, 9));
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10000; ++k) {
    const Slot ni = 1 + rng() % 50, nj = 1 + rng() % 50;
    ASSERT_TRUE(local_phase_identity(rng() % 1000, rng() % 1000, rng() % ni, rng() % nj, ni, nj));
  }
}

TEST(ToDecimal, RoundsExactly) {
  EXPECT_EQ(to_decimal(Rational(1, 3)), "0.333333");
  EXPECT_EQ(to_decimal(Rational(2, 3)), "0.666667");
  EXPECT_EQ(to_decimal(Rational(5)), "5.000000");
  EXPECT_EQ(to_decimal(Rational(-1, 8), 2), "-0.13");
}

TEST(Reduction, InstanceShape) {
  auto [topo, c] = build_reduction_instance(35);
  EXPECT_EQ(topo.edge_count(), 1u);
  EXPECT_EQ(c.at(1), (Bounds{2, 34}));
  EXPECT_EQ(c.at(2), (Bounds{35, 35}));
  EXPECT_THROW(build_reduction_instance(3), std::domain_error);
}

TEST(BruteForce, ReductionFifteen) {
  auto [topo, c] = build_reduction_instance(15);
  auto s = brute_force_solve(topo, c);
  ASSERT_TRUE(s);
  EXPECT_TRUE(s->at(1).period == 3 || s->at(1).period == 5);
  EXPECT_EQ(s->at(2).period, 15);
}

// Node 1's own bound is R - 1 while every rendezvous gap with node 2 is a
// multiple of R, so the 1 -> 2 constraint cannot hold for any n_1.
TEST(BruteForce, ReductionNodeOneBoundIsBelowEveryGap) {
  for (Slot r = 4; r <= 60; ++r) {
    auto [topo, c] = build_reduction_instance(r);
    for (Slot n1 = c.lower(1); n1 <= c.upper(1); ++n1) {
      Schedule s{{1, single_phase(1, n1, 0, {2})}, {2, single_phase(2, r, 0, {1})}};
      const auto rep = verify(s, topo, c);
      ASSERT_FALSE(rep.tight);
      for (auto& e : rep.constraints)
        if (e.from == 1) { ASSERT_TRUE(e.violated); }
    }
  }
}

TEST(BruteForce, Examples) {
  ConstraintSet forced;
  forced.set(1, 2, 2);
  forced.set(2, 2, 2);
  auto s = brute_force_solve(pair_topo(), forced);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->at(1).period, 2);
  EXPECT_EQ(s->at(2).period, 2);
  EXPECT_EQ((s->at(1).phases[0] - s->at(2).phases[0]) % 2, 0);

  ConstraintSet prime;
  prime.set(1, 2, 6);
  prime.set(2, 7, 7);
  EXPECT_FALSE(brute_force_solve(pair_topo(), prime));
}

TEST(BruteForce, ReductionSucceedsIffComposite) {
  for (Slot r = 4; r <= 200; ++r) {
    auto [topo, c] = build_reduction_instance(r);
    const auto s = brute_force_solve(topo, c);
    ASSERT_EQ(s.has_value(), composite(r)) << r;
    if (!s) continue;
    const Slot n1 = s->at(1).period;
    ASSERT_GT(n1, 1);
    ASSERT_LT(n1, r);
    ASSERT_EQ(r % n1, 0);
    const auto rep = verify(*s, topo, c);
    ASSERT_TRUE(rep.tight && rep.strictly);
  }
}

// Independent enumeration on tiny 3-node instances.
TEST(BruteForce, AgreesWithNaiveEnumeration) {
  std::mt19937_64 rng(17);
  Topology path({1, 2, 3}, {{1, 2}, {2, 3}});
  for (int trial = 0; trial < 60; ++trial) {
    ConstraintSet c;
    for (NodeId v : {1, 2, 3}) {
      const Slot lo = 1 + rng() % 6;
      c.set(v, lo, lo + rng() % 6);
    }
    bool exists = false;
    for (Slot p1 = c.lower(1); p1 <= c.upper(1) && !exists; ++p1)
      for (Slot p2 = c.lower(2); p2 <= c.upper(2) && !exists; ++p2)
        for (Slot p3 = c.lower(3); p3 <= c.upper(3) && !exists; ++p3)
          for (Slot a2 = 0; a2 < p2 && !exists; ++a2)
            for (Slot a3 = 0; a3 < p3 && !exists; ++a3) {
              const auto s1 = single_phase(1, p1, 0), s2 = single_phase(2, p2, a2), s3 = single_phase(3, p3, a3);
              const auto g12 = max_gap(rendezvous(s1, s2)), g23 = max_gap(rendezvous(s2, s3));
              exists = g12 && g23 && *g12 <= std::min(c.upper(1), c.upper(2)) &&
                       *g23 <= std::min(c.upper(2), c.upper(3));
            }
    const auto got = brute_force_solve(path, c);
    ASSERT_EQ(got.has_value(), exists);
    if (got) { ASSERT_TRUE(verify(*got, path, c).tight); }
  }
}

TEST(BruteForce, GuardRejectsLargeInstances) {
  Topology five({1, 2, 3, 4, 5}, {{1, 2}, {2, 3}, {3, 4}, {4, 5}});
  ConstraintSet c;
  for (NodeId v : five.nodes()) c.set(v, 1, 4);
  EXPECT_THROW(brute_force_solve(five, c), SearchGuardError);
}

TEST(Serialize, RoundTrip) {
  Schedule s{{1, node(1, 8, {0, 3}, {{2, 0}, {3, 3}})}, {2, single_phase(2, 4, 0, {1})}, {3, single_phase(3, 16, 3, {1})}};
  const auto text = serialize(s);
  EXPECT_EQ(text, "1 8 0 0,3 2:0 3:3\n2 4 0 0 1:0\n3 16 3 3 1:3\n");
  EXPECT_EQ(parse_schedule(text), s);
  EXPECT_THROW(parse_schedule("1 4 x 0\n"), ParseError);
}

TEST(Constraints, WarningsForTightUpperBounds) {
  ConstraintSet c;
  c.set(1, 2, 3);
  c.set(2, 3, 10);
  EXPECT_EQ(constraint_warnings(pair_topo(), c), std::vector<NodeId>{1});
}
