#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "ufhe/arith.hpp"

namespace ufhe::transform {

enum class Direction { forward, inverse };

// Radix-2 tables for one (size, q). Forward runs Gentleman-Sande from natural to
// bit-reversed order; inverse runs Cooley-Tukey from bit-reversed back to natural.
class NttTables {
 public:
  NttTables(std::size_t size, const arith::Modulus& mod);
  NttTables(std::size_t size, const arith::Modulus& mod, u64 root);

  std::size_t size() const noexcept { return size_; }
  const arith::Modulus& modulus() const noexcept { return mod_; }
  u64 root() const noexcept { return root_; }

  void forward_to_bitrev(u64* a) const;
  void inverse_from_bitrev(u64* a, bool scale = true) const;

  bool operator==(const NttTables& o) const;

 private:
  std::size_t size_;
  arith::Modulus mod_;
  u64 root_;
  std::vector<arith::MulConst> fwd_;
  std::vector<arith::MulConst> inv_;
  arith::MulConst inv_size_;
};

void bit_reverse_permute(std::span<u64> a);

// Natural-order DFT of length M with root omega_M; the inverse includes 1/M.
std::vector<u64> ntt_pow2(std::span<const u64> values, const NttTables& tables, Direction dir);

std::size_t next_pow2(std::size_t x);

// Exact integer coefficients of Phi_m, lowest degree first.
std::vector<std::int64_t> cyclotomic_poly_int(u64 m);
std::vector<u64> cyclotomic_poly(u64 m, const arith::Modulus& mod);

class BluesteinPlan {
 public:
  BluesteinPlan(u64 m, const arith::Modulus& mod);

  u64 m() const noexcept { return m_; }
  std::size_t pad() const noexcept { return pad_; }
  std::size_t n() const noexcept { return n_; }
  const arith::Modulus& modulus() const noexcept { return mod_; }
  u64 psi() const noexcept { return psi_; }
  u64 omega() const noexcept { return omega_; }

  // psi^(k^2) for k in [0, m); psi^2 = omega_m and the table is m-periodic.
  const std::vector<u64>& tf1() const noexcept { return tf1_; }
  const NttTables& tf2() const noexcept { return tf2_; }
  // Forward size-M transform of D_pad (bit-reversed order) for both directions.
  const std::vector<u64>& dpad_hat() const noexcept { return dpad_hat_; }
  const std::vector<u64>& dpad_inv_hat() const noexcept { return dpad_inv_hat_; }
  const std::vector<std::uint8_t>& in_zmstar() const noexcept { return in_zmstar_; }
  const std::vector<std::uint32_t>& zmstar_prefix() const noexcept { return zmstar_prefix_; }
  const std::vector<std::uint32_t>& zmstar_positions() const noexcept { return positions_; }
  const std::vector<u64>& phi_m() const noexcept { return phi_; }

  std::size_t scratch_size() const noexcept { return pad_; }

  bool operator==(const BluesteinPlan& o) const;

  // Flips one chirp entry; used by the self-test's fault injection path.
  void inject_fault();

 private:
  friend void bluestein_dft(std::span<const u64>, std::span<u64>, const BluesteinPlan&, Direction,
                            std::span<u64>);
  friend void from_eval(std::span<const u64>, std::span<u64>, const BluesteinPlan&, std::span<u64>);
  friend void zmstar_filter(std::span<const u64>, std::span<u64>, const BluesteinPlan&);

  u64 m_;
  std::size_t pad_;
  std::size_t n_;
  arith::Modulus mod_;
  u64 psi_;
  u64 omega_;
  std::vector<u64> tf1_;
  std::vector<arith::MulConst> chirp_in_;       // psi^(k^2)
  std::vector<arith::MulConst> chirp_out_;      // psi^(k^2) / M
  std::vector<arith::MulConst> chirp_inv_in_;   // psi^(-k^2)
  std::vector<arith::MulConst> chirp_inv_out_;  // psi^(-k^2) / (M m)
  NttTables tf2_;
  std::vector<u64> dpad_hat_;
  std::vector<u64> dpad_inv_hat_;
  std::vector<arith::MulConst> dpad_hat_c_;
  std::vector<arith::MulConst> dpad_inv_hat_c_;
  std::vector<std::uint8_t> in_zmstar_;
  std::vector<std::uint32_t> zmstar_prefix_;
  std::vector<std::uint32_t> filter_target_;  // prefix index when coprime, else n (sink)
  std::vector<std::uint32_t> positions_;
  std::vector<u64> phi_;
  std::vector<std::pair<std::uint32_t, u64>> phi_terms_;  // nonzero non-leading terms, negated
};

// Caller provides scratch of at least plan.scratch_size() residues; in and out may alias.
void bluestein_dft(std::span<const u64> in, std::span<u64> out, const BluesteinPlan& plan, Direction dir,
                   std::span<u64> scratch);
std::vector<u64> bluestein_dft(std::span<const u64> in, const BluesteinPlan& plan, Direction dir);

// Branch-free scatter through the prefix-sum index map.
void zmstar_filter(std::span<const u64> evals, std::span<u64> out, const BluesteinPlan& plan);
std::vector<u64> zmstar_filter(std::span<const u64> evals, const BluesteinPlan& plan);
// Sequential loop with the coprimality branch; reference for the scatter.
std::vector<u64> zmstar_filter_reference(std::span<const u64> evals, const BluesteinPlan& plan);
std::vector<u64> zmstar_scatter(std::span<const u64> compact, const BluesteinPlan& plan);

// Coefficients (degree < n) to values at omega_m^j for j in Z_m*, and back.
// Scratch must hold 2 * plan.scratch_size() residues.
void to_eval(std::span<const u64> coeffs, std::span<u64> out, const BluesteinPlan& plan, std::span<u64> scratch);
void from_eval(std::span<const u64> compact, std::span<u64> out, const BluesteinPlan& plan,
               std::span<u64> scratch);
std::vector<u64> to_eval(std::span<const u64> coeffs, const BluesteinPlan& plan);
std::vector<u64> from_eval(std::span<const u64> compact, const BluesteinPlan& plan);

// Plans keyed by (m, q); each key is built at most once.
class PlanCache {
 public:
  std::shared_ptr<const BluesteinPlan> get(u64 m, const arith::Modulus& mod);
  std::size_t build_count() const;
  std::size_t build_count(u64 m, u64 q) const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::pair<u64, u64>, std::shared_ptr<const BluesteinPlan>> plans_;
  std::map<std::pair<u64, u64>, std::size_t> builds_;
  std::size_t build_counter_ = 0;
};

std::shared_ptr<const BluesteinPlan> build_plan(u64 m, const arith::Modulus& mod, PlanCache& cache);

}  // namespace ufhe::transform
