#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ufhe/arith.hpp"
#include "ufhe/rng.hpp"
#include "ufhe/transform.hpp"

namespace ufhe::ring {

enum class Rep { coeff, eval };

// Immutable ring data shared by every polynomial over Z_Q[x]/Phi_m.
class RingContext {
 public:
  RingContext(u64 m, arith::RnsBasis basis, transform::PlanCache& cache);

  u64 m() const noexcept { return m_; }
  std::size_t n() const noexcept { return n_; }
  const arith::RnsBasis& basis() const noexcept { return basis_; }
  std::size_t prime_count() const noexcept { return basis_.size(); }
  const arith::Modulus& prime(std::size_t i) const { return basis_[i]; }
  const transform::BluesteinPlan& plan(std::size_t i) const { return *plans_.at(i); }
  // Basis of the first count primes, with its own CRT data.
  const arith::RnsBasis& level_basis(std::size_t count) const { return level_bases_.at(count); }
  const std::vector<std::int64_t>& phi_int() const noexcept { return phi_int_; }
  std::size_t scratch_size() const noexcept { return scratch_size_; }

  // Bound on |coeff(a*b mod Phi_m)| / (|a|_inf |b|_inf) for a, b of degree < n.
  double mul_expansion() const noexcept { return mul_expansion_; }
  // Bound on |coeff(a(x^t) mod Phi_m)| / |a|_inf for any t in Z_m*.
  double auto_expansion() const noexcept { return auto_expansion_; }

  // Index map for x -> x^t on compact evaluation vectors: out[j] = in[perm[j]].
  std::vector<std::uint32_t> automorphism_map(u64 t) const;

 private:
  u64 m_;
  std::size_t n_;
  arith::RnsBasis basis_;
  std::vector<std::shared_ptr<const transform::BluesteinPlan>> plans_;
  std::vector<arith::RnsBasis> level_bases_;
  std::vector<std::int64_t> phi_int_;
  std::vector<std::uint32_t> zmstar_index_;  // position of i in the compact vector, or n
  std::size_t scratch_size_;
  double mul_expansion_;
  double auto_expansion_;
};

using RingPtr = std::shared_ptr<const RingContext>;

// Residue matrix over the first `active` primes of the ring's basis.
// Rows are independently allocated.
class RnsPoly {
 public:
  RnsPoly() = default;
  RnsPoly(RingPtr ctx, std::size_t active, Rep rep);

  const RingPtr& context() const noexcept { return ctx_; }
  Rep rep() const noexcept { return rep_; }
  std::size_t active() const noexcept { return rows_.size(); }
  std::size_t width() const noexcept { return ctx_ ? ctx_->n() : 0; }
  std::span<const u64> row(std::size_t i) const { return rows_[i]; }
  std::span<u64> row_mut(std::size_t i) { return rows_[i]; }
  const arith::Modulus& prime(std::size_t i) const { return ctx_->prime(i); }

  bool operator==(const RnsPoly& o) const { return rep_ == o.rep_ && rows_ == o.rows_; }

 private:
  RingPtr ctx_;
  Rep rep_ = Rep::coeff;
  std::vector<std::vector<u64>> rows_;
};

// Contiguous (rows x width) staging region with a row directory.
class StageBuffer {
 public:
  void gather(const RnsPoly& p);
  void scatter(RnsPoly& p) const;
  u64* row(std::size_t i) { return data_.data() + i * width_; }
  const u64* row(std::size_t i) const { return data_.data() + i * width_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t width() const noexcept { return width_; }
  void reserve(std::size_t rows, std::size_t width) { data_.reserve(rows * width); }

 private:
  std::vector<u64> data_;
  std::size_t rows_ = 0;
  std::size_t width_ = 0;
};

// Per-thread scratch: two staging buffers plus transform scratch.
struct Workspace {
  StageBuffer a;
  StageBuffer b;
  std::vector<u64> scratch;

  void reserve(std::size_t rows, std::size_t width, std::size_t transform_scratch);
  std::span<u64> transform_scratch(std::size_t size);

  // The workspace bound to the calling thread (a thread-local default if none is bound).
  static Workspace& current();
  // Binds ws to the calling thread; returns the previous binding.
  static Workspace* bind(Workspace* ws);
};

enum class ElementOp { add, sub, mul };

// Staged pipeline: gather a and b, one kernel over the whole matrix, write back.
RnsPoly elementwise(ElementOp op, const RnsPoly& a, const RnsPoly& b);
// Row-by-row kernel on the original rows; reference for the staged path.
RnsPoly elementwise_reference(ElementOp op, const RnsPoly& a, const RnsPoly& b);

inline RnsPoly add(const RnsPoly& a, const RnsPoly& b) { return elementwise(ElementOp::add, a, b); }
inline RnsPoly sub(const RnsPoly& a, const RnsPoly& b) { return elementwise(ElementOp::sub, a, b); }
inline RnsPoly mul(const RnsPoly& a, const RnsPoly& b) { return elementwise(ElementOp::mul, a, b); }

RnsPoly negate(const RnsPoly& a);
RnsPoly mul_scalar(const RnsPoly& a, std::int64_t c);
// Multiplies row i by per-prime constants c[i].
RnsPoly mul_scalar_rns(const RnsPoly& a, std::span<const u64> c);

RnsPoly convert(const RnsPoly& a, Rep target);

// Restriction to the first `active` primes (no rescaling).
RnsPoly drop_to(const RnsPoly& a, std::size_t active);

// Embeds signed integer coefficients into every active prime (coeff rep).
RnsPoly from_signed(const RingPtr& ctx, std::size_t active, std::span<const std::int64_t> coeffs);

// Centered big-integer coefficients of a coeff-rep polynomial.
std::vector<BigInt> compose(const RnsPoly& a);

enum class SampleKind { uniform, ternary, error };

inline constexpr double kErrorSigma = 3.2;
inline constexpr int kErrorBound = 19;  // floor(6 * sigma)

// uniform is returned in eval rep (uniform in both representations); ternary and error in coeff rep.
RnsPoly sample(SampleKind kind, const RingPtr& ctx, std::size_t active, Prng& rng);
RnsPoly sample(SampleKind kind, const RingPtr& ctx, std::size_t active, std::uint64_t seed);
std::vector<std::int64_t> sample_error_coeffs(std::size_t count, Prng& rng);

// a' = (a - delta) / q_last with delta = a mod q_last, delta = 0 mod p, |delta| minimal.
RnsPoly mod_switch_drop(const RnsPoly& a, u64 p);
// Same map for an eval-rep input; only the dropped row is converted.
RnsPoly mod_switch_drop_eval(const RnsPoly& a, u64 p);

// x -> x^t on a compact eval-rep polynomial.
RnsPoly automorphism(const RnsPoly& a, u64 t);

}  // namespace ufhe::ring
