#pragma once

// Exact integer algebra for wake-up scheduling: gcd/lcm, Bezout triples,
// Chinese-remainder solving and factor-basis smoothness.
//
// All arithmetic runs in 128-bit signed integers. Products that would leave
// that range raise std::overflow_error; nothing wraps silently.

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wakeup {

using wide = __int128;

inline constexpr wide wide_max = static_cast<wide>((~static_cast<unsigned __int128>(0)) >> 1);

inline std::string to_string(wide v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  std::string out;
  while (u != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) out.push_back('-');
  std::reverse(out.begin(), out.end());
  return out;
}

inline wide checked_mul(wide a, wide b) {
  wide r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("128-bit multiplication overflow");
  return r;
}

inline wide checked_add(wide a, wide b) {
  wide r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("128-bit addition overflow");
  return r;
}

inline wide checked_sub(wide a, wide b) {
  wide r;
  if (__builtin_sub_overflow(a, b, &r)) throw std::overflow_error("128-bit subtraction overflow");
  return r;
}

// Least non-negative residue of a modulo m (m >= 1).
inline wide mod_floor(wide a, wide m) {
  wide r = a % m;
  return r < 0 ? r + m : r;
}

// Narrowing to the 64-bit slot type used by schedules.
inline std::int64_t narrow(wide v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw std::overflow_error("value " + to_string(v) + " exceeds 64-bit slot range");
  return static_cast<std::int64_t>(v);
}

/// gcd(a, b) for non-negative inputs with gcd(a, 0) = a.
inline wide gcd(wide a, wide b) {
  if (a < 0 || b < 0) throw std::domain_error("gcd: arguments must be non-negative");
  if (a == 0 && b == 0) throw std::domain_error("gcd: both arguments are zero");
  while (b != 0) {
    wide t = a % b;
    a = b;
    b = t;
  }
  return a;
}

/// lcm(a, b) = a / gcd(a, b) * b, overflow-checked.
inline wide lcm(wide a, wide b) {
  if (a < 1 || b < 1) throw std::domain_error("lcm: arguments must be positive");
  return checked_mul(a / gcd(a, b), b);
}

struct BezoutTriple {
  wide g;
  wide u;
  wide v;
};

/// Returns (g, u, v) with a*u + b*v = g = gcd(a, b), u normalized into
/// [1, b/g] so the triple is unique.
///
/// The additive sign convention is used throughout; callers that want the
/// subtractive form n1*u1 - n2*u2 = g take u2 = -v.
inline BezoutTriple ext_gcd(wide a, wide b) {
  if (a < 1 || b < 1) throw std::domain_error("ext_gcd: arguments must be positive");
  wide old_r = a, r = b;
  wide old_s = 1, s = 0;
  wide old_t = 0, t = 1;
  while (r != 0) {
    const wide q = old_r / r;
    std::tie(old_r, r) = std::pair{r, old_r - q * r};
    std::tie(old_s, s) = std::pair{s, old_s - q * s};
    std::tie(old_t, t) = std::pair{t, old_t - q * t};
  }
  const wide g = old_r, step = b / g;
  wide u = mod_floor(old_s, step);
  if (u == 0) u = step;
  // a*u <= a*b/g fits for 63-bit inputs
  const wide v = (g - checked_mul(a, u)) / b;
  return {g, u, v};
}

struct CrtSolution {
  wide x0;
  wide modulus;

  friend bool operator==(const CrtSolution&, const CrtSolution&) = default;
};

// (a*b) mod m without leaving 128 bits, for 0 <= a, b < m.
inline wide mulmod(wide a, wide b, wide m) {
  wide r;
  if (!__builtin_mul_overflow(a, b, &r)) return r % m;
  wide acc = 0;
  a %= m;
  while (b > 0) {
    if (b & 1) acc = (acc >= m - a) ? acc - (m - a) : acc + a;
    a = (a >= m - a) ? a - (m - a) : a + a;
    b >>= 1;
  }
  return acc;
}

/// Solves x = a1 (mod n1), x = a2 (mod n2).
///
/// Empty exactly when gcd(n1, n2) does not divide a1 - a2. Otherwise x0 is
/// the least non-negative solution and modulus = lcm(n1, n2).
inline std::optional<CrtSolution> crt_pair(wide a1, wide n1, wide a2, wide n2) {
  if (n1 < 1 || n2 < 1) throw std::domain_error("crt_pair: moduli must be positive");
  const auto [g, u, v] = ext_gcd(n1, n2);
  a1 = mod_floor(a1, n1);
  a2 = mod_floor(a2, n2);
  const wide diff = a2 - a1;
  if (diff % g != 0) return std::nullopt;
  const wide m = lcm(n1, n2);
  // x = a1 + n1 * k with n1*k = diff (mod n2)  =>  k = u * diff/g (mod n2/g)
  const wide step = n2 / g;
  const wide k = mulmod(mod_floor(u, step), mod_floor(diff / g, step), step);
  const wide x0 = mod_floor(checked_add(a1, checked_mul(n1, k)), m);
  return CrtSolution{x0, m};
}

/// Folds crt_pair left to right over (residue, modulus) pairs.
inline std::optional<CrtSolution> crt_system(std::span<const std::pair<wide, wide>> congruences) {
  if (congruences.empty()) throw std::domain_error("crt_system: empty congruence list");
  const auto& [r0, m0] = congruences.front();
  if (m0 < 1) throw std::domain_error("crt_system: moduli must be positive");
  CrtSolution acc{mod_floor(r0, m0), m0};
  for (const auto& [r, m] : congruences.subspan(1)) {
    auto next = crt_pair(acc.x0, acc.modulus, r, m);
    if (!next) return std::nullopt;
    acc = *next;
  }
  return acc;
}

inline std::optional<CrtSolution> crt_system(std::initializer_list<std::pair<wide, wide>> congruences) {
  std::vector<std::pair<wide, wide>> v(congruences);
  return crt_system(std::span<const std::pair<wide, wide>>(v));
}

inline bool is_prime(wide x) {
  if (x < 2) return false;
  for (wide d = 2; d * d <= x; ++d)
    if (x % d == 0) return false;
  return true;
}

/// Ascending set of distinct primes used to build smooth periods.
class FactorBasis {
 public:
  FactorBasis(std::initializer_list<std::int64_t> primes) : FactorBasis(std::vector<std::int64_t>(primes)) {}

  explicit FactorBasis(std::vector<std::int64_t> primes) : primes_(std::move(primes)) {
    if (primes_.empty()) throw std::domain_error("FactorBasis: empty basis");
    for (std::size_t i = 0; i < primes_.size(); ++i) {
      if (!is_prime(primes_[i]))
        throw std::domain_error("FactorBasis: " + std::to_string(primes_[i]) + " is not prime");
      if (i > 0 && primes_[i] <= primes_[i - 1])
        throw std::domain_error("FactorBasis: primes must be strictly ascending");
    }
  }

  const std::vector<std::int64_t>& primes() const { return primes_; }

  std::string str() const {
    std::string s;
    for (std::size_t i = 0; i < primes_.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(primes_[i]);
    }
    return s;
  }

  friend bool operator==(const FactorBasis&, const FactorBasis&) = default;

 private:
  std::vector<std::int64_t> primes_;
};

/// True iff x factorizes over the basis (x = 1 counts as the empty product).
inline bool is_smooth(wide x, const FactorBasis& basis) {
  if (x < 1) throw std::domain_error("is_smooth: argument must be positive");
  for (const auto p : basis.primes())
    while (x % p == 0) x /= p;
  return x == 1;
}

/// Smallest basis-smooth integer in [lower, upper]; lower itself when the
/// interval holds none.
inline std::int64_t period(std::int64_t lower, std::int64_t upper, const FactorBasis& basis) {
  if (lower < 1 || upper < 1) throw std::domain_error("period: bounds must be positive");
  if (lower > upper)
    throw std::domain_error("period: lower bound " + std::to_string(lower) + " exceeds upper bound " +
                            std::to_string(upper));
  for (std::int64_t x = lower; x <= upper; ++x)
    if (is_smooth(x, basis)) return x;
  return lower;
}

}  // namespace wakeup
