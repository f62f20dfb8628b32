#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "wakeup/numtheory.hpp"

using namespace wakeup;

namespace {

// Exhaustive reference: smallest x in [0, n1*n2) with both congruences.
std::optional<wide> crt_by_scan(wide a1, wide n1, wide a2, wide n2) {
  for (wide x = 0; x < n1 * n2; ++x)
    if (mod_floor(x - a1, n1) == 0 && mod_floor(x - a2, n2) == 0) return x;
  return std::nullopt;
}

wide gcd_by_scan(wide a, wide b) {
  for (wide d = std::max(a, b); d > 1; --d)
    if (a % d == 0 && b % d == 0) return d;
  return 1;
}

}  // namespace

TEST(Gcd, SmallCases) {
  EXPECT_EQ(gcd(12, 18), 6);
  EXPECT_EQ(gcd(5, 3), 1);
  EXPECT_EQ(gcd(0, 7), 7);
  EXPECT_EQ(gcd(7, 0), 7);
  EXPECT_THROW(gcd(0, 0), std::domain_error);
}

TEST(Lcm, SmallCases) {
  EXPECT_EQ(lcm(4, 6), 12);
  EXPECT_EQ(lcm(5, 3), 15);
  const wide big = static_cast<wide>(1) << 40;
  EXPECT_EQ(lcm(big, big + 1), big * (big + 1));
}

TEST(Lcm, OverflowIsReported) {
  const wide a = static_cast<wide>(1) << 100;
  EXPECT_THROW(lcm(a, a - 1), std::overflow_error);
}

TEST(Lcm, ProductIdentityExhaustive) {
  for (wide a = 1; a <= 1000; ++a)
    for (wide b = 1; b <= 1000; ++b) ASSERT_EQ(gcd(a, b) * lcm(a, b), a * b) << to_string(a) << " " << to_string(b);
}

TEST(Gcd, MatchesScanOnSmallGrid) {
  for (wide a = 1; a <= 60; ++a)
    for (wide b = 1; b <= 60; ++b) ASSERT_EQ(gcd(a, b), gcd_by_scan(a, b));
}

TEST(ExtGcd, Examples) {
  auto t = ext_gcd(5, 3);
  EXPECT_EQ(t.g, 1);
  EXPECT_EQ(t.u, 2);
  EXPECT_EQ(t.v, -3);
  t = ext_gcd(4, 6);
  EXPECT_EQ(t.g, 2);
  EXPECT_EQ(4 * t.u + 6 * t.v, 2);
  t = ext_gcd(7, 7);
  EXPECT_EQ(t.g, 7);
  EXPECT_EQ(t.u, 1);
  EXPECT_EQ(t.v, 0);
}

TEST(ExtGcd, RandomSixtyFourBitInputsSatisfyIdentity) {
  std::mt19937_64 rng(20240611);
  for (int k = 0; k < 20000; ++k) {
    const wide a = static_cast<wide>(rng() >> 1) + 1, b = static_cast<wide>(rng() >> 1) + 1;
    const auto t = ext_gcd(a, b);
    ASSERT_EQ(a * t.u + b * t.v, t.g);
    ASSERT_EQ(t.g, gcd(a, b));
    ASSERT_GE(t.u, 1);
    ASSERT_LE(t.u, b / t.g);
  }
}

TEST(CrtPair, Examples) {
  auto s = crt_pair(1, 5, 2, 3);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->x0, 11);
  EXPECT_EQ(s->modulus, 15);
  EXPECT_FALSE(crt_pair(0, 4, 2, 8));
  s = crt_pair(3, 6, 1, 4);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->x0, 9);
  EXPECT_EQ(s->modulus, 12);
}

TEST(CrtPair, NegativeAndLargeResiduesAreNormalized) {
  auto s = crt_pair(-4, 5, 5, 3);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->x0, 11);
}

// Full cross-check against scanning, including the existence predicate.
TEST(CrtPair, MatchesExhaustiveSearchUpTo30) {
  for (wide n1 = 1; n1 <= 30; ++n1)
    for (wide n2 = 1; n2 <= 30; ++n2)
      for (wide a1 = 0; a1 < n1; ++a1)
        for (wide a2 = 0; a2 < n2; ++a2) {
          const auto got = crt_pair(a1, n1, a2, n2);
          const auto want = crt_by_scan(a1, n1, a2, n2);
          ASSERT_EQ(got.has_value(), want.has_value());
          ASSERT_EQ(got.has_value(), (a1 - a2) % gcd(n1, n2) == 0);
          if (got) {
            ASSERT_EQ(got->x0, *want);
            ASSERT_EQ(got->modulus, lcm(n1, n2));
          }
        }
}

TEST(CrtSystem, Examples) {
  auto s = crt_system({{1, 5}, {2, 3}, {3, 4}});
  ASSERT_TRUE(s);
  EXPECT_EQ(s->x0, 11);
  EXPECT_EQ(s->modulus, 60);
  s = crt_system({{0, 9}});
  ASSERT_TRUE(s);
  EXPECT_EQ(s->x0, 0);
  EXPECT_EQ(s->modulus, 9);
  EXPECT_FALSE(crt_system({{0, 2}, {1, 2}}));
  EXPECT_THROW(crt_system(std::initializer_list<std::pair<wide, wide>>{}), std::domain_error);
}

TEST(CrtSystem, ThreeCongruencesMatchScan) {
  const std::vector<std::pair<wide, wide>> eqs{{1, 5}, {2, 3}, {3, 4}};
  for (wide x = 0; x < 60; ++x) {
    bool ok = true;
    for (auto [a, n] : eqs) ok = ok && mod_floor(x - a, n) == 0;
    if (ok) {
      EXPECT_EQ(x, 11);
      break;
    }
  }
}

TEST(CrtSystem, PermutationInvariant) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::pair<wide, wide>> eqs;
    const wide x = static_cast<wide>(rng() % 5000);
    const int k = 2 + static_cast<int>(rng() % 3);
    for (int i = 0; i < k; ++i) {
      const wide n = 1 + static_cast<wide>(rng() % 24);
      // half of the systems are consistent by construction
      const wide a = trial % 2 ? mod_floor(x, n) : static_cast<wide>(rng() % 24);
      eqs.emplace_back(a, n);
    }
    const auto ref = crt_system(eqs);
    std::sort(eqs.begin(), eqs.end());
    do {
      const auto got = crt_system(eqs);
      ASSERT_EQ(got.has_value(), ref.has_value());
      if (got) {
        ASSERT_EQ(got->x0, ref->x0);
        ASSERT_EQ(got->modulus, ref->modulus);
        for (auto [a, n] : eqs) ASSERT_EQ(mod_floor(got->x0 - a, n), 0);
      }
    } while (std::next_permutation(eqs.begin(), eqs.end()));
  }
}

TEST(FactorBasis, RejectsBadInput) {
  EXPECT_THROW(FactorBasis({4}), std::domain_error);
  EXPECT_THROW(FactorBasis({3, 2}), std::domain_error);
  EXPECT_THROW(FactorBasis({2, 2}), std::domain_error);
  EXPECT_THROW(FactorBasis(std::vector<std::int64_t>{}), std::domain_error);
  EXPECT_NO_THROW(FactorBasis({2, 3, 5}));
}

TEST(IsSmooth, Examples) {
  EXPECT_TRUE(is_smooth(16, FactorBasis{2}));
  EXPECT_FALSE(is_smooth(12, FactorBasis{2}));
  EXPECT_TRUE(is_smooth(12, FactorBasis{2, 3}));
  EXPECT_TRUE(is_smooth(1, FactorBasis{2}));
}

TEST(Period, SevenNodeColumn) {
  const FactorBasis b{2};
  const std::vector<std::int64_t> L{2, 3, 9, 7, 11, 5, 2}, want{2, 4, 16, 8, 16, 8, 2};
  for (std::size_t i = 0; i < L.size(); ++i) EXPECT_EQ(period(L[i], 20, b), want[i]) << "L=" << L[i];
}

TEST(Period, FallbackAndErrors) {
  EXPECT_EQ(period(17, 18, FactorBasis{2}), 17);
  EXPECT_THROW(period(5, 4, FactorBasis{2}), std::domain_error);
}

TEST(Period, SmallestSmoothInRange) {
  const std::vector<FactorBasis> bases{FactorBasis{2}, FactorBasis{2, 3}, FactorBasis{2, 3, 5}, FactorBasis{3, 7}};
  for (auto& b : bases)
    for (std::int64_t lo = 1; lo <= 80; ++lo)
      for (std::int64_t hi = lo; hi <= 120; ++hi) {
        const std::int64_t p = period(lo, hi, b);
        std::optional<std::int64_t> first;
        for (std::int64_t x = lo; x <= hi && !first; ++x)
          if (is_smooth(x, b)) first = x;
        ASSERT_EQ(p, first.value_or(lo));
      }
}
