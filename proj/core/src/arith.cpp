#include "ufhe/arith.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ufhe/error.hpp"

namespace ufhe::arith {

Modulus::Modulus(u64 q) : q_(q) {
  if (q < 3 || q >= (u64{1} << 62)) {
    throw std::invalid_argument("modulus must lie in [3, 2^62): " + std::to_string(q));
  }
  // floor(2^128 / q) as two words, computed by long division in base 2^64.
  const u128 hi_num = static_cast<u128>(1) << 64;  // 2^128 = hi_num * 2^64
  const u128 hi_quot = hi_num / q;                 // 2^64 / q
  const u128 rem = hi_num % q;
  const u128 lo_num = rem << 64;
  ratio_hi_ = static_cast<u64>(hi_quot);
  ratio_lo_ = static_cast<u64>(lo_num / q);
  bits_ = 64 - __builtin_clzll(q);
}

u64 pow_mod(u64 a, u64 e, const Modulus& mod) {
  u64 result = mod.reduce(u64{1});
  u64 base = mod.reduce(a);
  while (e > 0) {
    if (e & 1) result = mul_mod(result, base, mod);
    base = mul_mod(base, base, mod);
    e >>= 1;
  }
  return result;
}

u64 inv_mod(u64 a, const Modulus& mod) {
  std::int64_t t = 0, new_t = 1;
  i128 r = mod.value(), new_r = mod.reduce(a);
  while (new_r != 0) {
    const i128 quot = r / new_r;
    const i128 tmp_t = t - quot * new_t;
    t = new_t;
    new_t = static_cast<std::int64_t>(tmp_t);
    const i128 tmp_r = r - quot * new_r;
    r = new_r;
    new_r = tmp_r;
  }
  if (r != 1) throw std::invalid_argument("inv_mod: element is not invertible");
  return from_signed(t, mod);
}

MulConst make_mul_const(u64 w, const Modulus& mod) {
  MulConst c;
  c.operand = w;
  c.quotient = static_cast<u64>((static_cast<u128>(w) << 64) / mod.value());
  return c;
}

namespace {

u64 mul_mod_raw(u64 a, u64 b, u64 n) { return static_cast<u64>(static_cast<u128>(a) * b % n); }

u64 pow_mod_raw(u64 a, u64 e, u64 n) {
  u64 r = 1 % n;
  a %= n;
  while (e > 0) {
    if (e & 1) r = mul_mod_raw(r, a, n);
    a = mul_mod_raw(a, a, n);
    e >>= 1;
  }
  return r;
}

}  // namespace

bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 small : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % small == 0) return n == small;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // Deterministic witness set for all 64-bit inputs.
  for (u64 a : {2ull, 325ull, 9375ull, 28178ull, 450775ull, 9780504ull, 1795265022ull}) {
    const u64 w = a % n;
    if (w == 0) continue;
    u64 x = pow_mod_raw(w, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mul_mod_raw(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::vector<u64> prime_factors(u64 n) {
  std::vector<u64> out;
  for (u64 f = 2; f * f <= n; f += (f == 2 ? 1 : 2)) {
    if (n % f == 0) {
      out.push_back(f);
      while (n % f == 0) n /= f;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

u64 gcd(u64 a, u64 b) { return std::gcd(a, b); }

u64 lcm(u64 a, u64 b) { return a / std::gcd(a, b) * b; }

u64 euler_phi(u64 n) {
  u64 result = n;
  for (u64 f : prime_factors(n)) result = result / f * (f - 1);
  return result;
}

u64 multiplicative_order(u64 a, u64 m) {
  if (m == 1) return 1;
  if (std::gcd(a, m) != 1) raise(Errc::not_coprime, "multiplicative_order: gcd(a, m) != 1");
  u64 order = euler_phi(m);
  for (u64 f : prime_factors(order)) {
    while (order % f == 0 && pow_mod_raw(a, order / f, m) == 1) order /= f;
  }
  return order;
}

u64 find_root(u64 order, const Modulus& mod) {
  const u64 q = mod.value();
  if (order == 0 || (q - 1) % order != 0) {
    raise(Errc::order_not_dividing,
          "order " + std::to_string(order) + " does not divide q-1 for q=" + std::to_string(q));
  }
  if (order == 1) return 1;
  const auto factors = prime_factors(order);
  const u64 cofactor = (q - 1) / order;
  for (u64 g = 2; g < q; ++g) {
    const u64 w = pow_mod(g, cofactor, mod);
    bool primitive = true;
    for (u64 r : factors) {
      if (pow_mod(w, order / r, mod) == 1) {
        primitive = false;
        break;
      }
    }
    if (primitive) return w;
  }
  raise(Errc::order_not_dividing, "no primitive root found; q is not prime");
}

RnsBasis::RnsBasis(std::vector<Modulus> primes) : primes_(std::move(primes)) {
  for (std::size_t i = 0; i < primes_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (primes_[i] == primes_[j]) throw std::invalid_argument("RnsBasis: duplicate prime");
    }
    big_q_ *= primes_[i].value();
  }
  units_.reserve(primes_.size());
  for (const auto& q : primes_) {
    const BigInt q_hat = big_q_ / q.value();
    const u64 q_hat_mod = reduce_big(q_hat, q);
    units_.push_back(q_hat * inv_mod(q_hat_mod, q));
  }
}

RnsBasis RnsBasis::prefix(std::size_t count) const {
  if (count > primes_.size()) throw std::out_of_range("RnsBasis::prefix");
  return RnsBasis(std::vector<Modulus>(primes_.begin(), primes_.begin() + count));
}

RnsBasis gen_ntt_primes(u64 m, u64 pad, int bits, std::size_t count, u64 extra) {
  if (bits < 20 || bits > 62) throw std::invalid_argument("gen_ntt_primes: bits must be in [20, 62]");
  if (pad == 0 || (pad & (pad - 1)) != 0) throw std::invalid_argument("gen_ntt_primes: pad must be a power of two");
  std::vector<Modulus> primes;
  if (count == 0) return RnsBasis(primes);
  const u64 step = lcm(lcm(2 * m, pad), extra);
  const u64 lower = u64{1} << (bits - 1);
  const u64 upper = u64{1} << bits;
  u64 q = (lower - 1) / step * step + 1;
  if (q < lower) q += step;
  for (; q < upper && primes.size() < count; q += step) {
    if (is_prime(q)) primes.emplace_back(q);
  }
  if (primes.size() < count) {
    raise(Errc::not_enough_primes, "found " + std::to_string(primes.size()) + " of " +
                                       std::to_string(count) + " primes of " + std::to_string(bits) +
                                       " bits congruent to 1 mod " + std::to_string(step));
  }
  return RnsBasis(std::move(primes));
}

BigInt crt_compose(std::span<const u64> residues, const RnsBasis& basis) {
  if (residues.size() != basis.size()) raise(Errc::length_mismatch, "crt_compose: residue count");
  BigInt x = 0;
  for (std::size_t i = 0; i < residues.size(); ++i) {
    if (residues[i] != 0) x += basis.crt_unit(i) * residues[i];
  }
  const BigInt& q = basis.big_q();
  x %= q;
  if (x * 2 > q) x -= q;
  return x;
}

u64 reduce_big(const BigInt& x, const Modulus& mod) {
  BigInt r = x % mod.value();
  if (r < 0) r += mod.value();
  return static_cast<u64>(r);
}

}  // namespace ufhe::arith
