#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ufhe/bgv.hpp"
#include "ufhe/executor.hpp"
#include "ufhe/plainspace.hpp"

namespace ufhe::cmp {

using bgv::Ciphertext;
using bgv::Plaintext;

enum class CircuitKind { bivariate, univariate };
std::string_view circuit_name(CircuitKind kind) noexcept;
CircuitKind circuit_from_bgv(bgv::Circuit c) noexcept;

enum class Phase : std::size_t { extraction, lt_eq, shift_mul, shift_add, other };
inline constexpr std::size_t kPhaseCount = 5;
std::string_view phase_name(Phase ph) noexcept;

struct PhaseCounts {
  std::uint64_t nonscalar_mults = 0;
  std::uint64_t scalar_mults = 0;
  std::uint64_t adds = 0;
  std::uint64_t rotations = 0;

  PhaseCounts& operator+=(const PhaseCounts& o) noexcept;
  bool operator==(const PhaseCounts&) const = default;
};

// Thread-safe operation counters per phase, plus per-digit-job multiplication maxima.
class OpCounter {
 public:
  enum class Kind : std::size_t { nonscalar, scalar, add, rotation };

  void bump(Phase ph, Kind kind, std::uint64_t n = 1) noexcept;
  PhaseCounts phase(Phase ph) const noexcept;
  PhaseCounts total() const noexcept;

  // One digit comparison job (LT, EQ or both on a ciphertext pair) used `mults` non-scalar products.
  void record_digit_job(CircuitKind kind, std::uint64_t mults) noexcept;
  std::uint64_t max_digit_job(CircuitKind kind) const noexcept;
  std::uint64_t digit_jobs(CircuitKind kind) const noexcept;

  void reset() noexcept;

 private:
  std::array<std::array<std::atomic<std::uint64_t>, 4>, kPhaseCount> counts_{};
  std::array<std::atomic<std::uint64_t>, 2> max_job_{};
  std::array<std::atomic<std::uint64_t>, 2> jobs_{};
};

// Homomorphic operations with counting and automatic level alignment.
class Evaluator {
 public:
  Evaluator(bgv::ContextPtr ctx, const bgv::KswKey& relin, const bgv::GaloisKeys& galois,
            OpCounter* counter = nullptr);

  const bgv::ContextPtr& ctx() const noexcept { return ctx_; }
  OpCounter* counter() const noexcept { return counter_; }
  // Copy sharing keys and counter, with a fresh local tally.
  Evaluator fork() const;
  // Non-scalar multiplications issued through this instance.
  std::uint64_t tally() const noexcept { return tally_; }

  Ciphertext mul(const Ciphertext& a, const Ciphertext& b, Phase ph);
  Ciphertext square(const Ciphertext& a, Phase ph);
  Ciphertext mul_plain(const Ciphertext& a, const Plaintext& pt, Phase ph);
  Ciphertext mul_scalar(const Ciphertext& a, std::int64_t c, Phase ph);
  Ciphertext add(const Ciphertext& a, const Ciphertext& b, Phase ph);
  Ciphertext sub(const Ciphertext& a, const Ciphertext& b, Phase ph);
  Ciphertext add_plain(const Ciphertext& a, const Plaintext& pt, Phase ph);
  Ciphertext add_scalar(const Ciphertext& a, std::int64_t c, Phase ph);
  Ciphertext negate(const Ciphertext& a, Phase ph);
  Ciphertext rotate(const Ciphertext& a, std::int64_t k, Phase ph);

 private:
  void bump(Phase ph, OpCounter::Kind kind, std::uint64_t n = 1) noexcept {
    if (counter_ != nullptr) counter_->bump(ph, kind, n);
  }

  bgv::ContextPtr ctx_;
  const bgv::KswKey* relin_;
  const bgv::GaloisKeys* galois_;
  OpCounter* counter_;
  std::uint64_t tally_ = 0;
};

// Digit comparison polynomials over F_p, verified against the indicators at build time.
class DigitCircuit {
 public:
  static DigitCircuit build(u64 p, CircuitKind kind);

  u64 p() const noexcept { return p_; }
  CircuitKind kind() const noexcept { return kind_; }
  plain::Alphabet alphabet() const noexcept {
    return kind_ == CircuitKind::bivariate ? plain::Alphabet::full : plain::Alphabet::half;
  }
  // c[i][j] is the coefficient of x^i y^j in LT(x, y), from interpolation over all p^2 points.
  const std::vector<std::vector<u64>>& lt_bivar_coeffs() const noexcept { return bivar_; }
  // Coefficients of S(z): 1 on z = -1..-(p-1)/2, 0 on z = 0..(p-1)/2.
  const std::vector<u64>& lt_univar_coeffs() const noexcept { return univar_; }
  // LT(x, y) = half * T^h + Z * sum_b S^b * sum_a odd[b][a] T^a with Z = x-y, S = x+y, T = Z^2.
  const std::vector<std::vector<u64>>& odd_part() const noexcept { return odd_; }
  u64 half() const noexcept { return half_; }

  // Budget for one digit job of this kind; bivariate 2p-6+ceil(log2(p-1)), univariate 2ceil(sqrt p)+2ceil(log2 p).
  std::uint64_t nonscalar_mult_budget() const noexcept;
  // The 3p-5 reference cost.
  std::uint64_t reference_cost() const noexcept { return 3 * p_ - 5; }

  // Plaintext evaluations of the three representations.
  u64 eval_table(u64 x, u64 y) const;
  u64 eval_zs(u64 x, u64 y) const;
  u64 eval_univar(u64 z) const;

 private:
  u64 p_ = 0;
  CircuitKind kind_ = CircuitKind::bivariate;
  std::vector<std::vector<u64>> bivar_;
  std::vector<u64> univar_;
  std::vector<std::vector<u64>> odd_;
  u64 half_ = 0;
};

// Interpolating polynomial of the values f(0..p-1), degree < p.
std::vector<u64> interpolate_fp(std::span<const u64> values, u64 p);
// Horner evaluation over F_p.
u64 eval_fp(std::span<const u64> coeffs, u64 x, u64 p);

struct DigitResult {
  Ciphertext lt;
  Ciphertext eq;
};

// Slotwise [x = y] as 1 - (x-y)^(p-1).
Ciphertext eq_digit(const Ciphertext& x, const Ciphertext& y, Evaluator& ev);
// Slotwise [x < y] for digits in the circuit's alphabet.
Ciphertext lt_digit(const Ciphertext& x, const Ciphertext& y, const DigitCircuit& circuit, Evaluator& ev);
// Both indicators sharing one power ladder; records the job's multiplication count.
DigitResult lt_eq_digit(const Ciphertext& x, const Ciphertext& y, const DigitCircuit& circuit, Evaluator& ev);

// Baby-step giant-step evaluation of sum coeffs[i] x^i.
Ciphertext poly_eval_ps(std::span<const u64> coeffs, const Ciphertext& x, Evaluator& ev, Phase ph = Phase::lt_eq);
Ciphertext poly_eval_horner(std::span<const u64> coeffs, const Ciphertext& x, Evaluator& ev,
                            Phase ph = Phase::lt_eq);
// 2 ceil(sqrt(deg+1)) + ceil(log2 deg)
std::uint64_t ps_mult_bound(std::size_t deg) noexcept;

// Integers are packed one per block of `width` consecutive slots, least significant digit first.
struct Layout {
  u64 p = 0;
  plain::Alphabet alphabet = plain::Alphabet::full;
  unsigned bits = 0;
  std::size_t digits = 0;
  std::size_t width = 0;
  std::size_t blocks = 0;
  std::size_t l = 0;

  u64 max_value() const;  // all digits at the top of the alphabet
};

// Throws CapacityExceeded when one integer does not fit into l slots.
Layout make_layout(u64 p, std::size_t l, unsigned bits, plain::Alphabet alphabet);

std::vector<u64> pack_ints(std::span<const u64> values, const Layout& layout, u64 fill = 0);
std::vector<u64> unpack_ints(std::span<const u64> slots, const Layout& layout, std::size_t count);
// Slot value at the head of each of the first count blocks.
std::vector<u64> head_values(std::span<const u64> slots, const Layout& layout, std::size_t count);

// 0/1 plaintexts describing block structure.
class BlockMasks {
 public:
  BlockMasks(bgv::ContextPtr ctx, const Layout& layout);

  const Layout& layout() const noexcept { return layout_; }
  // 1 where offset + d stays inside the block, and its complement over all slots.
  const Plaintext& forward(std::size_t d) const;
  const Plaintext& forward_fill(std::size_t d) const;
  // 1 where offset >= d.
  const Plaintext& backward(std::size_t d) const;
  // 1 on block heads of blocks [lo, hi).
  const Plaintext& heads(std::size_t lo, std::size_t hi) const;
  // 1 on every slot of blocks [lo, hi).
  const Plaintext& blocks(std::size_t lo, std::size_t hi) const;
  // value v written into blocks [lo, hi) as digits, 0 elsewhere.
  const Plaintext& fill(std::size_t lo, std::size_t hi, u64 v) const;

 private:
  const Plaintext& cached(int kind, std::size_t a, std::size_t b, u64 v) const;

  bgv::ContextPtr ctx_;
  Layout layout_;
  mutable std::mutex mu_;
  mutable std::map<std::array<u64, 4>, Plaintext> cache_;
};

// Everything a comparison needs besides keys.
struct CompareSetup {
  bgv::ContextPtr ctx;
  DigitCircuit circuit;
  Layout layout;
  std::shared_ptr<const BlockMasks> masks;

  static CompareSetup make(const bgv::ContextPtr& ctx, CircuitKind kind, unsigned bits);
};

// Results are valid at block heads; other slots hold garbage.
struct CompareResult {
  Ciphertext lt;
  Ciphertext eq;
};

CompareResult lex_combine(const Ciphertext& lt_digits, const Ciphertext& eq_digits, const BlockMasks& masks,
                          Evaluator& ev);
CompareResult compare_ints(const Ciphertext& a, const Ciphertext& b, const CompareSetup& setup, Evaluator& ev);
// [a = b] at block heads from digit EQ and the ShiftMul ladder alone.
Ciphertext eq_ints(const Ciphertext& a, const Ciphertext& b, const CompareSetup& setup, Evaluator& ev);
// Digit jobs of all pairs run through the executor, then the combination step.
std::vector<CompareResult> compare_ints(const std::vector<Ciphertext>& a, const std::vector<Ciphertext>& b,
                                        const CompareSetup& setup, Evaluator& ev, exec::Executor& ex);

// Copies each head value of blocks [0, count) over its whole block and zeroes everything else.
Ciphertext broadcast_heads(const Ciphertext& ct, std::size_t count, const CompareSetup& setup, Evaluator& ev);
// b + (a - b) * sel, with sel a 0/1 value replicated over each block.
Ciphertext select(const Ciphertext& a, const Ciphertext& b, const Ciphertext& sel, Evaluator& ev);

// Items hold integers in all blocks (unused blocks filled with layout.max_value()).
// Block 0 of the result holds the minimum.
Ciphertext min_tournament(std::vector<Ciphertext> items, const CompareSetup& setup, Evaluator& ev,
                          exec::Executor& ex);
// v holds n integers in blocks [0, n), zeros elsewhere; needs 2n blocks and n < p.
// The result holds them in ascending order (ties by index).
Ciphertext sort_rank(const Ciphertext& v, std::size_t n, const CompareSetup& setup, Evaluator& ev,
                     exec::Executor& ex);

}  // namespace ufhe::cmp
