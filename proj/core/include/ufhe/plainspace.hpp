#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ufhe/arith.hpp"

namespace ufhe::plain {

// Polynomials over F_p, lowest degree first.
using Poly = std::vector<u64>;

namespace fp {

void trim(Poly& a);
Poly add(const Poly& a, const Poly& b, u64 p);
Poly sub(const Poly& a, const Poly& b, u64 p);
Poly mul(const Poly& a, const Poly& b, u64 p);
// Quotient and remainder by a nonzero divisor.
void divmod(const Poly& a, const Poly& b, u64 p, Poly& quot, Poly& rem);
Poly mod(const Poly& a, const Poly& b, u64 p);
Poly gcd(Poly a, Poly b, u64 p);
// Inverse of a modulo f; throws if not coprime.
Poly inv_mod(const Poly& a, const Poly& f, u64 p);
// x^e mod f with e = p^k computed by k successive p-th powers.
Poly pow_mod(const Poly& a, const BigInt& e, const Poly& f, u64 p);
bool is_irreducible(const Poly& f, u64 p);
u64 inv_scalar(u64 a, u64 p);

}  // namespace fp

// Element of F_{p^d}: d coefficients modulo field_poly.
using GfElem = std::vector<u64>;

class GfField {
 public:
  GfField() = default;
  GfField(u64 p, Poly modulus);

  u64 p() const noexcept { return p_; }
  std::size_t degree() const noexcept { return d_; }
  const Poly& modulus() const noexcept { return f_; }

  GfElem zero() const { return GfElem(d_, 0); }
  GfElem one() const;
  GfElem scalar(u64 c) const;
  GfElem add(const GfElem& a, const GfElem& b) const;
  GfElem sub(const GfElem& a, const GfElem& b) const;
  GfElem mul(const GfElem& a, const GfElem& b) const;
  GfElem pow(const GfElem& a, const BigInt& e) const;
  GfElem inv(const GfElem& a) const;
  bool is_zero(const GfElem& a) const;
  bool is_scalar(const GfElem& a) const;

 private:
  u64 p_ = 0;
  std::size_t d_ = 0;
  Poly f_;
};

class SlotAlgebra {
 public:
  static SlotAlgebra build(u64 p, u64 m, std::uint64_t seed = 0x5107a19eULL);

  u64 p() const noexcept { return p_; }
  u64 m() const noexcept { return m_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t d() const noexcept { return d_; }
  std::size_t l() const noexcept { return l_; }
  const GfField& field() const noexcept { return field_; }
  const Poly& field_poly() const noexcept { return field_.modulus(); }
  const std::vector<std::vector<u64>>& cosets() const noexcept { return cosets_; }
  const std::vector<u64>& representatives() const noexcept { return reps_; }
  const std::vector<Poly>& factors() const noexcept { return factors_; }
  const std::vector<Poly>& crt_units() const noexcept { return units_; }
  // Generator of Z_m*/<p> whose powers index the slots; 0 when the quotient is not cyclic.
  u64 rot_generator() const noexcept { return gen_; }
  bool cyclic() const noexcept { return gen_ != 0; }
  const Poly& phi() const noexcept { return phi_; }

  // Slot holding the coset of e (e coprime to m).
  std::size_t slot_of(u64 e) const;
  // out[j] = in[perm[j]] under x -> x^t, up to Frobenius on each value.
  std::vector<std::size_t> slot_perm_for(u64 t) const;
  // g^k mod m.
  u64 rotation_exponent(std::int64_t k) const;

  Poly encode(std::span<const GfElem> values) const;
  Poly encode_scalars(std::span<const u64> values) const;
  std::vector<GfElem> decode(std::span<const u64> poly) const;
  // Constant terms of the decoded slots.
  std::vector<u64> decode_scalars(std::span<const u64> poly) const;

 private:
  u64 p_ = 0, m_ = 0, gen_ = 0;
  std::size_t n_ = 0, d_ = 0, l_ = 0;
  GfField field_;
  Poly phi_;
  std::vector<u64> reps_;
  std::vector<std::vector<u64>> cosets_;
  std::vector<std::uint32_t> slot_index_;  // length m; l for non-units
  std::vector<Poly> factors_;
  std::vector<Poly> units_;
  std::vector<std::vector<GfElem>> theta_powers_;        // per slot: theta_i^k, k < d
  std::vector<std::vector<std::vector<u64>>> to_poly_;  // per slot: inverse of the theta power matrix
};

Poly encode_slots(std::span<const GfElem> values, const SlotAlgebra& alg);
std::vector<GfElem> decode_slots(std::span<const u64> poly, const SlotAlgebra& alg);

enum class Alphabet { full, half };

struct DigitVec {
  std::vector<u64> digits;  // least significant first
  Alphabet alphabet = Alphabet::full;
};

// Radix of the alphabet: p for full, (p+1)/2 for half.
u64 digit_radix(u64 p, Alphabet alphabet);
DigitVec int_to_digits(u64 x, u64 p, std::size_t count, Alphabet alphabet);
u64 digits_to_int(const DigitVec& v, u64 p);
// Smallest digit count covering integers of the given bit width.
std::size_t digits_for_bits(unsigned bits, u64 p, Alphabet alphabet);

}  // namespace ufhe::plain
