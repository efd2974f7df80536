#include "ufhe/plainspace.hpp"

#include <algorithm>
#include <string>
#include <tuple>

#include "ufhe/error.hpp"
#include "ufhe/rng.hpp"
#include "ufhe/transform.hpp"

namespace ufhe::plain {

namespace fp {

void trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

u64 inv_scalar(u64 a, u64 p) {
  a %= p;
  if (a == 0) throw std::invalid_argument("inv_scalar: zero has no inverse");
  std::int64_t t = 0, nt = 1, r = static_cast<std::int64_t>(p), nr = static_cast<std::int64_t>(a);
  while (nr != 0) {
    const std::int64_t q = r / nr;
    std::tie(t, nt) = std::make_pair(nt, t - q * nt);
    std::tie(r, nr) = std::make_pair(nr, r - q * nr);
  }
  if (t < 0) t += static_cast<std::int64_t>(p);
  return static_cast<u64>(t);
}

Poly add(const Poly& a, const Poly& b, u64 p) {
  Poly out(std::max(a.size(), b.size()), 0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] = (out[i] + b[i]) % p;
  trim(out);
  return out;
}

Poly sub(const Poly& a, const Poly& b, u64 p) {
  Poly out(std::max(a.size(), b.size()), 0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] = (out[i] + p - b[i]) % p;
  trim(out);
  return out;
}

Poly mul(const Poly& a, const Poly& b, u64 p) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] = (out[i + j] + a[i] * b[j]) % p;
  }
  trim(out);
  return out;
}

void divmod(const Poly& a, const Poly& b, u64 p, Poly& quot, Poly& rem) {
  Poly div = b;
  trim(div);
  if (div.empty()) throw std::invalid_argument("fp::divmod: division by zero");
  rem = a;
  trim(rem);
  quot.clear();
  if (rem.size() < div.size()) return;
  quot.assign(rem.size() - div.size() + 1, 0);
  const u64 lead_inv = inv_scalar(div.back(), p);
  for (std::size_t shift = quot.size(); shift-- > 0;) {
    const u64 c = rem[shift + div.size() - 1] * lead_inv % p;
    quot[shift] = c;
    if (c == 0) continue;
    for (std::size_t j = 0; j < div.size(); ++j) rem[shift + j] = (rem[shift + j] + p - c * div[j] % p) % p;
  }
  trim(rem);
  trim(quot);
}

Poly mod(const Poly& a, const Poly& b, u64 p) {
  Poly q, r;
  divmod(a, b, p, q, r);
  return r;
}

Poly gcd(Poly a, Poly b, u64 p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Poly r = mod(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.empty()) {
    const u64 inv = inv_scalar(a.back(), p);
    for (auto& c : a) c = c * inv % p;
  }
  return a;
}

Poly inv_mod(const Poly& a, const Poly& f, u64 p) {
  Poly r0 = f, r1 = mod(a, f, p);
  Poly s0, s1 = {1};
  while (!r1.empty()) {
    Poly q, r;
    divmod(r0, r1, p, q, r);
    Poly s = sub(s0, mul(q, s1, p), p);
    r0 = std::move(r1);
    r1 = std::move(r);
    s0 = std::move(s1);
    s1 = std::move(s);
  }
  if (r0.size() != 1) throw std::invalid_argument("fp::inv_mod: not invertible");
  const u64 c = inv_scalar(r0[0], p);
  for (auto& v : s0) v = v * c % p;
  return mod(s0, f, p);
}

Poly pow_mod(const Poly& a, const BigInt& e, const Poly& f, u64 p) {
  Poly result = {1};
  result = mod(result, f, p);
  if (e == 0) return result;
  const Poly base = mod(a, f, p);
  const std::size_t top = boost::multiprecision::msb(e);
  for (std::size_t bit = top + 1; bit-- > 0;) {
    result = mod(mul(result, result, p), f, p);
    if (boost::multiprecision::bit_test(e, static_cast<unsigned>(bit))) result = mod(mul(result, base, p), f, p);
  }
  return result;
}

bool is_irreducible(const Poly& f, u64 p) {
  Poly g = f;
  trim(g);
  const std::size_t d = g.size() - 1;
  if (d == 0) return false;
  if (d == 1) return true;
  const Poly x = {0, 1};
  // powers[k] = x^(p^k) mod f
  std::vector<Poly> powers(d + 1);
  powers[0] = mod(x, g, p);
  for (std::size_t k = 1; k <= d; ++k) powers[k] = pow_mod(powers[k - 1], BigInt(p), g, p);
  if (sub(powers[d], mod(x, g, p), p).size() != 0) return false;
  for (u64 r : arith::prime_factors(d)) {
    const Poly h = sub(powers[d / r], x, p);
    if (gcd(g, h, p).size() != 1) return false;
  }
  return true;
}

}  // namespace fp

GfField::GfField(u64 p, Poly modulus) : p_(p), d_(modulus.size() - 1), f_(std::move(modulus)) {}

GfElem GfField::one() const {
  GfElem e(d_, 0);
  e[0] = 1 % p_;
  return e;
}

GfElem GfField::scalar(u64 c) const {
  GfElem e(d_, 0);
  e[0] = c % p_;
  return e;
}

GfElem GfField::add(const GfElem& a, const GfElem& b) const {
  GfElem out(d_);
  for (std::size_t i = 0; i < d_; ++i) out[i] = (a[i] + b[i]) % p_;
  return out;
}

GfElem GfField::sub(const GfElem& a, const GfElem& b) const {
  GfElem out(d_);
  for (std::size_t i = 0; i < d_; ++i) out[i] = (a[i] + p_ - b[i]) % p_;
  return out;
}

GfElem GfField::mul(const GfElem& a, const GfElem& b) const {
  Poly r = fp::mod(fp::mul(a, b, p_), f_, p_);
  r.resize(d_, 0);
  return r;
}

GfElem GfField::pow(const GfElem& a, const BigInt& e) const {
  Poly r = fp::pow_mod(a, e, f_, p_);
  r.resize(d_, 0);
  return r;
}

GfElem GfField::inv(const GfElem& a) const {
  Poly r = fp::inv_mod(a, f_, p_);
  r.resize(d_, 0);
  return r;
}

bool GfField::is_zero(const GfElem& a) const {
  return std::all_of(a.begin(), a.end(), [](u64 c) { return c == 0; });
}

bool GfField::is_scalar(const GfElem& a) const {
  return std::all_of(a.begin() + 1, a.end(), [](u64 c) { return c == 0; });
}

namespace {

// Inverse of a d x d matrix over F_p by Gauss-Jordan elimination.
std::vector<std::vector<u64>> invert_matrix(std::vector<std::vector<u64>> a, u64 p) {
  const std::size_t d = a.size();
  std::vector<std::vector<u64>> inv(d, std::vector<u64>(d, 0));
  for (std::size_t i = 0; i < d; ++i) inv[i][i] = 1 % p;
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t piv = col;
    while (piv < d && a[piv][col] == 0) ++piv;
    if (piv == d) throw std::runtime_error("slot basis matrix is singular");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const u64 s = fp::inv_scalar(a[col][col], p);
    for (std::size_t j = 0; j < d; ++j) {
      a[col][j] = a[col][j] * s % p;
      inv[col][j] = inv[col][j] * s % p;
    }
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col || a[r][col] == 0) continue;
      const u64 c = a[r][col];
      for (std::size_t j = 0; j < d; ++j) {
        a[r][j] = (a[r][j] + p - c * a[col][j] % p) % p;
        inv[r][j] = (inv[r][j] + p - c * inv[col][j] % p) % p;
      }
    }
  }
  return inv;
}

u64 pow_small(u64 a, u64 e, u64 m) {
  u64 r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = static_cast<u64>(static_cast<u128>(r) * a % m);
    a = static_cast<u64>(static_cast<u128>(a) * a % m);
    e >>= 1;
  }
  return r;
}

// Reduces a dense polynomial modulo the monic phi in place, returning n coefficients.
Poly reduce_mod_phi(Poly a, const Poly& phi, u64 p) {
  const std::size_t n = phi.size() - 1;
  for (std::size_t k = a.size(); k-- > n;) {
    const u64 c = a[k];
    if (c == 0) continue;
    for (std::size_t j = 0; j <= n; ++j) a[k - n + j] = (a[k - n + j] + p - c * phi[j] % p) % p;
  }
  a.resize(n, 0);
  return a;
}

}  // namespace

SlotAlgebra SlotAlgebra::build(u64 p, u64 m, std::uint64_t seed) {
  if (p < 2 || !arith::is_prime(p)) throw std::invalid_argument("build_slot_algebra: p must be prime");
  if (m < 2) throw std::invalid_argument("build_slot_algebra: m must be at least 2");
  if (arith::gcd(p, m) != 1) raise(Errc::not_coprime, "gcd(p, m) != 1");
  SlotAlgebra alg;
  alg.p_ = p;
  alg.m_ = m;
  alg.n_ = arith::euler_phi(m);
  alg.d_ = arith::multiplicative_order(p % m, m);
  alg.l_ = alg.n_ / alg.d_;
  const std::size_t d = alg.d_, l = alg.l_;

  // Irreducible field polynomial by seeded random search.
  Prng rng(seed ^ (p * 0x100000001b3ULL) ^ m);
  Poly f;
  do {
    f.assign(d + 1, 0);
    for (std::size_t i = 0; i < d; ++i) f[i] = rng.uniform(p);
    f[d] = 1;
  } while (!fp::is_irreducible(f, p));
  alg.field_ = GfField(p, f);
  const GfField& F = alg.field_;

  // Primitive m-th root of unity in F_{p^d}.
  BigInt order_total = 1;
  for (std::size_t i = 0; i < d; ++i) order_total *= p;
  order_total -= 1;
  const BigInt cofactor = order_total / m;
  const auto m_factors = arith::prime_factors(m);
  GfElem zeta;
  for (;;) {
    GfElem alpha(d);
    for (auto& c : alpha) c = rng.uniform(p);
    if (F.is_zero(alpha)) continue;
    zeta = F.pow(alpha, cofactor);
    bool primitive = true;
    for (u64 r : m_factors) {
      const GfElem z = F.pow(zeta, BigInt(m / r));
      if (z == F.one()) {
        primitive = false;
        break;
      }
    }
    if (primitive) break;
  }

  // Slot representatives: the orbit of a generator of Z_m*/<p> when cyclic.
  std::vector<std::uint8_t> in_p_group(m, 0);
  for (std::size_t e = 0; e < d; ++e) in_p_group[pow_small(p, e, m)] = 1;
  for (u64 g = 1; g < m && alg.gen_ == 0; ++g) {
    if (arith::gcd(g, m) != 1) continue;
    u64 x = g % m;
    std::size_t k = 1;
    while (!in_p_group[x]) {
      x = static_cast<u64>(static_cast<u128>(x) * g % m);
      ++k;
    }
    if (k == l) alg.gen_ = g;
  }
  alg.slot_index_.assign(m, static_cast<std::uint32_t>(l));
  if (alg.gen_ != 0) {
    u64 r = 1 % m;
    for (std::size_t i = 0; i < l; ++i) {
      alg.reps_.push_back(r);
      r = static_cast<u64>(static_cast<u128>(r) * alg.gen_ % m);
    }
  } else {
    std::vector<std::uint8_t> seen(m, 0);
    for (u64 i = 1; i < m; ++i) {
      if (arith::gcd(i, m) != 1 || seen[i]) continue;
      alg.reps_.push_back(i);
      for (std::size_t e = 0; e < d; ++e) seen[static_cast<u64>(static_cast<u128>(i) * pow_small(p, e, m) % m)] = 1;
    }
  }
  if (alg.reps_.size() != l) throw std::logic_error("slot representative count mismatch");
  for (std::size_t i = 0; i < l; ++i) {
    std::vector<u64> coset;
    for (std::size_t e = 0; e < d; ++e) {
      const u64 x = static_cast<u64>(static_cast<u128>(alg.reps_[i]) * pow_small(p, e, m) % m);
      coset.push_back(x);
      if (alg.slot_index_[x] != l) throw std::logic_error("cosets overlap");
      alg.slot_index_[x] = static_cast<std::uint32_t>(i);
    }
    alg.cosets_.push_back(std::move(coset));
  }

  // Factors of Phi_m over F_p, computed in F_{p^d} from the coset roots.
  const auto phi_ints = transform::cyclotomic_poly_int(m);
  const std::int64_t sp = static_cast<std::int64_t>(p);
  alg.phi_.resize(phi_ints.size());
  for (std::size_t i = 0; i < phi_ints.size(); ++i) alg.phi_[i] = static_cast<u64>(((phi_ints[i] % sp) + sp) % sp);
  Poly product = {1};
  for (std::size_t i = 0; i < l; ++i) {
    std::vector<GfElem> poly = {F.one()};
    for (u64 e : alg.cosets_[i]) {
      const GfElem root = F.pow(zeta, BigInt(e));
      std::vector<GfElem> next(poly.size() + 1, F.zero());
      for (std::size_t k = 0; k < poly.size(); ++k) {
        next[k + 1] = F.add(next[k + 1], poly[k]);
        next[k] = F.sub(next[k], F.mul(root, poly[k]));
      }
      poly = std::move(next);
    }
    Poly fi(poly.size());
    for (std::size_t k = 0; k < poly.size(); ++k) {
      if (!F.is_scalar(poly[k])) {
        raise(Errc::factorization_mismatch, "coset polynomial has coefficients outside F_p");
      }
      fi[k] = poly[k][0];
    }
    product = fp::mul(product, fi, p);
    alg.factors_.push_back(std::move(fi));
  }
  Poly phi_trim = alg.phi_;
  fp::trim(phi_trim);
  if (product != phi_trim) raise(Errc::factorization_mismatch, "product of factors differs from Phi_m mod p");

  // CRT units E_i = (Phi/F_i) * ((Phi/F_i)^{-1} mod F_i); degree < n.
  for (std::size_t i = 0; i < l; ++i) {
    Poly cof, rem;
    fp::divmod(phi_trim, alg.factors_[i], p, cof, rem);
    if (!rem.empty()) raise(Errc::factorization_mismatch, "factor does not divide Phi_m");
    const Poly inv = fp::inv_mod(fp::mod(cof, alg.factors_[i], p), alg.factors_[i], p);
    Poly unit = fp::mul(cof, inv, p);
    unit.resize(alg.n_, 0);
    alg.units_.push_back(std::move(unit));
  }

  // Per-slot bases: theta_i = zeta^{rep_i}; a value v corresponds to g with g(theta_i) = v.
  for (std::size_t i = 0; i < l; ++i) {
    const GfElem theta = F.pow(zeta, BigInt(alg.reps_[i]));
    std::vector<GfElem> powers(d);
    powers[0] = F.one();
    for (std::size_t k = 1; k < d; ++k) powers[k] = F.mul(powers[k - 1], theta);
    std::vector<std::vector<u64>> mat(d, std::vector<u64>(d));
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) mat[r][c] = powers[c][r];
    }
    alg.to_poly_.push_back(invert_matrix(mat, p));
    alg.theta_powers_.push_back(std::move(powers));
  }
  return alg;
}

std::size_t SlotAlgebra::slot_of(u64 e) const {
  const std::size_t s = slot_index_.at(e % m_);
  if (s >= l_) raise(Errc::not_coprime, "exponent is not a unit mod m");
  return s;
}

std::vector<std::size_t> SlotAlgebra::slot_perm_for(u64 t) const {
  if (arith::gcd(t % m_, m_) != 1) raise(Errc::not_coprime, "slot_perm_for: t not coprime to m");
  std::vector<std::size_t> perm(l_);
  for (std::size_t j = 0; j < l_; ++j) perm[j] = slot_of(static_cast<u64>(static_cast<u128>(t % m_) * reps_[j] % m_));
  return perm;
}

u64 SlotAlgebra::rotation_exponent(std::int64_t k) const {
  if (!cyclic()) raise(Errc::missing_galois_key, "slot group is not cyclic");
  const std::int64_t ll = static_cast<std::int64_t>(l_);
  const u64 kk = static_cast<u64>(((k % ll) + ll) % ll);
  return pow_small(gen_, kk, m_);
}

Poly SlotAlgebra::encode(std::span<const GfElem> values) const {
  if (values.size() != l_) raise(Errc::wrong_slot_count, "encode expects exactly l values");
  Poly acc(n_ + d_, 0);
  for (std::size_t i = 0; i < l_; ++i) {
    if (values[i].size() != d_) raise(Errc::wrong_slot_count, "slot value has wrong degree");
    std::vector<u64> g(d_, 0);
    for (std::size_t r = 0; r < d_; ++r) {
      u64 s = 0;
      for (std::size_t c = 0; c < d_; ++c) s = (s + to_poly_[i][r][c] * (values[i][c] % p_)) % p_;
      g[r] = s;
    }
    const Poly& unit = units_[i];
    for (std::size_t r = 0; r < d_; ++r) {
      if (g[r] == 0) continue;
      for (std::size_t j = 0; j < n_; ++j) acc[r + j] = (acc[r + j] + g[r] * unit[j]) % p_;
    }
  }
  return reduce_mod_phi(std::move(acc), phi_, p_);
}

Poly SlotAlgebra::encode_scalars(std::span<const u64> values) const {
  if (values.size() != l_) raise(Errc::wrong_slot_count, "encode expects exactly l values");
  Poly acc(n_, 0);
  for (std::size_t i = 0; i < l_; ++i) {
    const u64 c = values[i] % p_;
    if (c == 0) continue;
    const Poly& unit = units_[i];
    for (std::size_t j = 0; j < n_; ++j) acc[j] = (acc[j] + c * unit[j]) % p_;
  }
  return acc;
}

std::vector<GfElem> SlotAlgebra::decode(std::span<const u64> poly) const {
  if (poly.size() > n_) raise(Errc::bad_length, "decode: degree exceeds n");
  Poly a(poly.begin(), poly.end());
  for (auto& c : a) c %= p_;
  std::vector<GfElem> out(l_);
  for (std::size_t i = 0; i < l_; ++i) {
    Poly r = fp::mod(a, factors_[i], p_);
    GfElem v = field_.zero();
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r[k] == 0) continue;
      for (std::size_t c = 0; c < d_; ++c) v[c] = (v[c] + r[k] * theta_powers_[i][k][c]) % p_;
    }
    out[i] = std::move(v);
  }
  return out;
}

std::vector<u64> SlotAlgebra::decode_scalars(std::span<const u64> poly) const {
  const auto vals = decode(poly);
  std::vector<u64> out(l_);
  for (std::size_t i = 0; i < l_; ++i) out[i] = vals[i][0];
  return out;
}

Poly encode_slots(std::span<const GfElem> values, const SlotAlgebra& alg) { return alg.encode(values); }

std::vector<GfElem> decode_slots(std::span<const u64> poly, const SlotAlgebra& alg) { return alg.decode(poly); }

u64 digit_radix(u64 p, Alphabet alphabet) { return alphabet == Alphabet::full ? p : (p + 1) / 2; }

DigitVec int_to_digits(u64 x, u64 p, std::size_t count, Alphabet alphabet) {
  const u64 b = digit_radix(p, alphabet);
  DigitVec v;
  v.alphabet = alphabet;
  v.digits.resize(count, 0);
  u64 rest = x;
  for (std::size_t i = 0; i < count; ++i) {
    v.digits[i] = rest % b;
    rest /= b;
  }
  if (rest != 0) raise(Errc::out_of_range, std::to_string(x) + " does not fit in " + std::to_string(count) + " digits");
  return v;
}

u64 digits_to_int(const DigitVec& v, u64 p) {
  const u64 b = digit_radix(p, v.alphabet);
  u64 x = 0;
  for (std::size_t i = v.digits.size(); i-- > 0;) {
    if (v.digits[i] >= b) raise(Errc::alphabet_violation, "digit outside alphabet");
    x = x * b + v.digits[i];
  }
  return x;
}

std::size_t digits_for_bits(unsigned bits, u64 p, Alphabet alphabet) {
  const u64 b = digit_radix(p, alphabet);
  BigInt cap = 1;
  const BigInt need = BigInt(1) << bits;
  std::size_t k = 0;
  while (cap < need) {
    cap *= b;
    ++k;
  }
  return std::max<std::size_t>(k, 1);
}

}  // namespace ufhe::plain
