#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ufhe {

using u64 = std::uint64_t;
using u128 = unsigned __int128;
using i128 = __int128;
using BigInt = boost::multiprecision::cpp_int;

}  // namespace ufhe

namespace ufhe::arith {

// Word-sized modulus with a precomputed floor(2^128 / q) for Barrett reduction.
// The value need not be prime (root finding and NTT tables do require it).
class Modulus {
 public:
  Modulus() = default;
  explicit Modulus(u64 q);

  u64 value() const noexcept { return q_; }
  int bit_count() const noexcept { return bits_; }

  // z mod q for any 128-bit z with z < 2^64 * q.
  u64 reduce(u128 z) const noexcept {
    const u64 lo = static_cast<u64>(z);
    const u64 hi = static_cast<u64>(z >> 64);
    const u64 carry = static_cast<u64>((static_cast<u128>(lo) * ratio_lo_) >> 64);
    const u128 t0 = static_cast<u128>(lo) * ratio_hi_;
    const u128 t1 = static_cast<u128>(hi) * ratio_lo_;
    const u128 mid = static_cast<u128>(static_cast<u64>(t0)) + carry + static_cast<u64>(t1);
    const u64 quot = hi * ratio_hi_ + static_cast<u64>(t0 >> 64) + static_cast<u64>(t1 >> 64) +
                     static_cast<u64>(mid >> 64);
    u64 r = lo - quot * q_;
    return r >= q_ ? r - q_ : r;
  }

  u64 reduce(u64 a) const noexcept { return reduce(static_cast<u128>(a)); }

  bool operator==(const Modulus& o) const noexcept { return q_ == o.q_; }

 private:
  u64 q_ = 0;
  u64 ratio_lo_ = 0;
  u64 ratio_hi_ = 0;
  int bits_ = 0;
};

inline u64 add_mod(u64 a, u64 b, const Modulus& mod) noexcept {
  const u64 s = a + b;
  return s >= mod.value() ? s - mod.value() : s;
}

inline u64 sub_mod(u64 a, u64 b, const Modulus& mod) noexcept {
  return a >= b ? a - b : a + mod.value() - b;
}

inline u64 neg_mod(u64 a, const Modulus& mod) noexcept { return a == 0 ? 0 : mod.value() - a; }

inline u64 mul_mod(u64 a, u64 b, const Modulus& mod) noexcept {
  return mod.reduce(static_cast<u128>(a) * b);
}

u64 pow_mod(u64 a, u64 e, const Modulus& mod);

// Inverse modulo q via extended Euclid. Throws if gcd(a, q) != 1.
u64 inv_mod(u64 a, const Modulus& mod);

// A fixed multiplicand with its Shoup quotient floor(w * 2^64 / q).
struct MulConst {
  u64 operand = 0;
  u64 quotient = 0;
};

MulConst make_mul_const(u64 w, const Modulus& mod);

inline u64 mul_mod_const(u64 a, MulConst w, u64 q) noexcept {
  const u64 hi = static_cast<u64>((static_cast<u128>(a) * w.quotient) >> 64);
  const u64 r = a * w.operand - hi * q;
  return r >= q ? r - q : r;
}

// Centered lift of a residue into (-q/2, q/2].
inline std::int64_t centered(u64 a, u64 q) noexcept {
  return a > q / 2 ? static_cast<std::int64_t>(a) - static_cast<std::int64_t>(q)
                   : static_cast<std::int64_t>(a);
}

// Residue of a signed 64-bit integer.
inline u64 from_signed(std::int64_t v, const Modulus& mod) noexcept {
  if (v >= 0) return mod.reduce(static_cast<u64>(v));
  const u64 r = mod.reduce(static_cast<u64>(-(v + 1)) + 1);
  return neg_mod(r, mod);
}

bool is_prime(u64 n);
std::vector<u64> prime_factors(u64 n);
u64 gcd(u64 a, u64 b);
u64 lcm(u64 a, u64 b);
u64 euler_phi(u64 n);

// Multiplicative order of a modulo m; requires gcd(a, m) = 1.
u64 multiplicative_order(u64 a, u64 m);

// Primitive order-th root of unity mod q.
u64 find_root(u64 order, const Modulus& mod);

// Ordered prime chain q_0..q_L with Q and CRT recombination data.
class RnsBasis {
 public:
  RnsBasis() = default;
  explicit RnsBasis(std::vector<Modulus> primes);

  std::size_t size() const noexcept { return primes_.size(); }
  bool empty() const noexcept { return primes_.empty(); }
  const Modulus& operator[](std::size_t i) const { return primes_[i]; }
  const std::vector<Modulus>& primes() const noexcept { return primes_; }
  const BigInt& big_q() const noexcept { return big_q_; }

  // Basis of the first count primes.
  RnsBasis prefix(std::size_t count) const;

  // q_hat_i * (q_hat_i^{-1} mod q_i) where q_hat_i = Q / q_i.
  const BigInt& crt_unit(std::size_t i) const { return units_[i]; }

  bool operator==(const RnsBasis& o) const noexcept { return primes_ == o.primes_; }

 private:
  std::vector<Modulus> primes_;
  BigInt big_q_{1};
  std::vector<BigInt> units_;
};

// Returns count primes q in [2^(bits-1), 2^bits) with q = 1 mod lcm(2m, pad, extra),
// searched upward from 2^(bits-1).
RnsBasis gen_ntt_primes(u64 m, u64 pad, int bits, std::size_t count, u64 extra = 1);

// Unique x in (-Q/2, Q/2] with x = residues[i] mod q_i.
BigInt crt_compose(std::span<const u64> residues, const RnsBasis& basis);

// x mod q for an arbitrary (possibly negative) big integer.
u64 reduce_big(const BigInt& x, const Modulus& mod);

}  // namespace ufhe::arith
