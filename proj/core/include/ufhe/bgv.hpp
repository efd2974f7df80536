#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "ufhe/arith.hpp"
#include "ufhe/plainspace.hpp"
#include "ufhe/ring.hpp"
#include "ufhe/rng.hpp"
#include "ufhe/slot_usage.hpp"
#include "ufhe/transform.hpp"

namespace ufhe::bgv {

enum class Circuit { bivariate, univariate };

struct ParamsSpec {
  u64 p = 3;
  u64 m = 91;
  std::size_t levels = 5;  // L; the chain has L+1 primes
  int prime_bits = 59;
  int ks_digit_bits = 16;
  Circuit circuit = Circuit::bivariate;
  std::uint64_t slot_seed = 0x5107a19eULL;
};

// Scheme parameters with the ring, slot algebra and noise constants they determine.
class Context {
 public:
  static std::shared_ptr<const Context> create(const ParamsSpec& spec, transform::PlanCache& cache);

  const ParamsSpec& spec() const noexcept { return spec_; }
  u64 p() const noexcept { return spec_.p; }
  u64 m() const noexcept { return spec_.m; }
  std::size_t n() const noexcept { return ring_->n(); }
  std::size_t d() const noexcept { return slots_.d(); }
  std::size_t l() const noexcept { return slots_.l(); }
  std::size_t levels() const noexcept { return spec_.levels; }
  std::size_t max_primes() const noexcept { return spec_.levels + 1; }
  Circuit circuit() const noexcept { return spec_.circuit; }
  const ring::RingPtr& ring() const noexcept { return ring_; }
  const plain::SlotAlgebra& slots() const noexcept { return slots_; }
  const arith::RnsBasis& basis() const noexcept { return ring_->basis(); }

  // Key-switching digits per prime and their width in bits.
  std::size_t ks_digits() const noexcept { return ks_digits_; }
  int ks_digit_bits() const noexcept { return spec_.ks_digit_bits; }

  double log2_q(std::size_t primes) const { return log2_q_.at(primes); }
  // log2 of the decryption threshold Q_level / 2.
  double log2_threshold(std::size_t primes) const { return log2_q_.at(primes) - 1.0; }

  // Noise constants (log2 of coefficient-norm bounds).
  double log2_fresh_noise() const noexcept { return log2_fresh_; }
  double log2_ks_noise(std::size_t primes) const;
  double log2_switch_additive() const noexcept { return log2_switch_add_; }
  double log2_mul_expansion() const noexcept { return log2_mul_exp_; }
  double log2_auto_expansion() const noexcept { return log2_auto_exp_; }

  // Advisory security level from (n, log Q) bands; 0 means below 128 bits.
  int security_estimate() const noexcept { return lambda_; }

 private:
  ParamsSpec spec_;
  ring::RingPtr ring_;
  plain::SlotAlgebra slots_;
  std::size_t ks_digits_ = 0;
  std::vector<double> log2_q_;
  double log2_fresh_ = 0;
  double log2_switch_add_ = 0;
  double log2_mul_exp_ = 0;
  double log2_auto_exp_ = 0;
  int lambda_ = 0;
};

using ContextPtr = std::shared_ptr<const Context>;

int security_estimate(std::size_t n, double log2_q);

struct SecretKey {
  ring::RnsPoly s;  // eval rep, full basis
};

struct PublicKey {
  ring::RnsPoly b;  // -a*s + p*e
  ring::RnsPoly a;
};

// Components (b_ik, a_ik) for prime i and digit k, index i * K + k, eval rep over the full basis:
// b_ik + a_ik * s = p * e_ik + target * u_i * 2^(w k), with u_i the CRT unit of prime i.
struct KswKey {
  u64 galois_exponent = 0;  // 0 for the relinearization key
  std::vector<ring::RnsPoly> b;
  std::vector<ring::RnsPoly> a;
};

struct GaloisKeys {
  std::map<u64, KswKey> keys;  // by automorphism exponent t
};

struct KeySet {
  SecretKey sk;
  PublicKey pk;
  KswKey relin;
  GaloisKeys galois;
};

// Galois keys cover the generator powers g^(+-2^j) with 2^j < l.
KeySet keygen(const ContextPtr& ctx, std::uint64_t seed);
KswKey make_galois_key(const ContextPtr& ctx, const SecretKey& sk, u64 t, std::uint64_t seed);

// Plaintext polynomial (coefficients mod p) with its eval-rep embedding cached.
class Plaintext {
 public:
  Plaintext() = default;
  Plaintext(const ContextPtr& ctx, plain::Poly coeffs, slots::SlotUsage usage);

  const plain::Poly& coeffs() const noexcept { return coeffs_; }
  const ring::RnsPoly& eval() const noexcept { return eval_; }
  // Infinity norm of the centered coefficients.
  u64 norm() const noexcept { return norm_; }
  // True when only the constant coefficient can be nonzero.
  bool is_constant() const noexcept { return constant_; }
  const slots::SlotUsage& usage() const noexcept { return usage_; }

 private:
  plain::Poly coeffs_;
  ring::RnsPoly eval_;
  u64 norm_ = 0;
  bool constant_ = true;
  slots::SlotUsage usage_;
};

// F_p values for the leading slots (zero padded); usage marks the supplied positions.
Plaintext encode(const ContextPtr& ctx, std::span<const u64> values);
Plaintext encode(const ContextPtr& ctx, std::span<const u64> values, slots::SlotUsage usage);
Plaintext encode_gf(const ContextPtr& ctx, std::span<const plain::GfElem> values);
Plaintext constant_plaintext(const ContextPtr& ctx, u64 c);

struct Ciphertext {
  std::vector<ring::RnsPoly> parts;  // eval rep
  double log2_noise = 0;              // bound on |c0 + c1 s (+ c2 s^2)|_inf before reduction mod p
  slots::SlotUsage usage;

  std::size_t level() const { return parts.empty() ? 0 : parts[0].active(); }
  std::size_t size() const noexcept { return parts.size(); }
  bool operator==(const Ciphertext& o) const { return parts == o.parts; }
};

Ciphertext encrypt(const Plaintext& pt, const PublicKey& pk, const ContextPtr& ctx, Prng& rng);
Ciphertext encrypt(const Plaintext& pt, const PublicKey& pk, const ContextPtr& ctx, std::uint64_t seed);
// Transparent encryption of a plaintext (zero noise) at the given prime count.
Ciphertext trivial(const Plaintext& pt, const ContextPtr& ctx, std::size_t primes);

plain::Poly decrypt(const Ciphertext& ct, const SecretKey& sk, const ContextPtr& ctx);
// Decrypts regardless of the tracked bound.
plain::Poly decrypt_unchecked(const Ciphertext& ct, const SecretKey& sk, const ContextPtr& ctx);
std::vector<u64> decrypt_slots(const Ciphertext& ct, const SecretKey& sk, const ContextPtr& ctx);
// log2 of the actual |c0 + c1 s (+ c2 s^2)|_inf; -inf when zero.
double measure_log2_noise(const Ciphertext& ct, const SecretKey& sk, const ContextPtr& ctx);

Ciphertext he_add(const Ciphertext& a, const Ciphertext& b, const ContextPtr& ctx);
Ciphertext he_sub(const Ciphertext& a, const Ciphertext& b, const ContextPtr& ctx);
Ciphertext he_negate(const Ciphertext& a, const ContextPtr& ctx);
Ciphertext he_add_plain(const Ciphertext& a, const Plaintext& pt, const ContextPtr& ctx);
Ciphertext he_sub_plain(const Ciphertext& a, const Plaintext& pt, const ContextPtr& ctx);
// pt - a
Ciphertext he_plain_sub(const Plaintext& pt, const Ciphertext& a, const ContextPtr& ctx);
Ciphertext he_mul_plain(const Ciphertext& a, const Plaintext& pt, const ContextPtr& ctx);
Ciphertext he_add_scalar(const Ciphertext& a, std::int64_t c, const ContextPtr& ctx);
Ciphertext he_mul_scalar(const Ciphertext& a, std::int64_t c, const ContextPtr& ctx);

// Tensor product without relinearization or switching; 3 parts.
Ciphertext he_mul_norelin(const Ciphertext& a, const Ciphertext& b, const ContextPtr& ctx);
Ciphertext relinearize(const Ciphertext& a, const KswKey& relin, const ContextPtr& ctx);
// Tensor, relinearize, then drop one prime.
Ciphertext he_mul(const Ciphertext& a, const Ciphertext& b, const KswKey& relin, const ContextPtr& ctx);
Ciphertext he_square(const Ciphertext& a, const KswKey& relin, const ContextPtr& ctx);

Ciphertext mod_switch(const Ciphertext& a, const ContextPtr& ctx);
Ciphertext mod_switch_to(const Ciphertext& a, std::size_t primes, const ContextPtr& ctx);
// Brings both operands to the lower of their levels.
void match_levels(Ciphertext& a, Ciphertext& b, const ContextPtr& ctx);

Ciphertext apply_galois(const Ciphertext& a, u64 t, const KswKey& key, const ContextPtr& ctx);
// Slot i of the result holds slot (i + k) mod l of the input (with Frobenius on wrap for non-F_p values).
Ciphertext rotate(const Ciphertext& a, std::int64_t k, const GaloisKeys& keys, const ContextPtr& ctx);
// Signed power-of-two hops rotate() uses for k (forward or backward, fewest hops).
std::vector<std::int64_t> rotation_hops(std::int64_t k, std::size_t l);

double noise_budget(const Ciphertext& ct, const ContextPtr& ctx);

}  // namespace ufhe::bgv
