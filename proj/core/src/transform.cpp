#include "ufhe/transform.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "ufhe/error.hpp"
#include "ufhe/metrics.hpp"

namespace ufhe::transform {

using arith::Modulus;
using arith::MulConst;
using arith::add_mod;
using arith::make_mul_const;
using arith::mul_mod;
using arith::mul_mod_const;
using arith::pow_mod;
using arith::sub_mod;

namespace {

bool is_pow2(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

std::vector<MulConst> const_table(const std::vector<u64>& values, const Modulus& mod) {
  std::vector<MulConst> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = make_mul_const(values[i], mod);
  return out;
}

// Exact division of integer polynomials by a monic divisor.
std::vector<std::int64_t> exact_div(const std::vector<std::int64_t>& num, const std::vector<std::int64_t>& den) {
  std::vector<i128> rem(num.begin(), num.end());
  const std::size_t dn = den.size() - 1;
  std::vector<std::int64_t> quot(num.size() - dn, 0);
  for (std::size_t k = num.size(); k-- > dn;) {
    const i128 c = rem[k];
    if (c > std::numeric_limits<std::int64_t>::max() || c < std::numeric_limits<std::int64_t>::min()) {
      throw std::overflow_error("cyclotomic_poly: coefficient overflow");
    }
    quot[k - dn] = static_cast<std::int64_t>(c);
    if (c == 0) continue;
    for (std::size_t j = 0; j <= dn; ++j) rem[k - dn + j] -= c * den[j];
  }
  for (std::size_t k = 0; k < dn; ++k) {
    if (rem[k] != 0) throw std::logic_error("cyclotomic_poly: inexact division");
  }
  return quot;
}

std::vector<std::int64_t> substitute_power(const std::vector<std::int64_t>& f, u64 r) {
  std::vector<std::int64_t> out((f.size() - 1) * r + 1, 0);
  for (std::size_t i = 0; i < f.size(); ++i) out[i * r] = f[i];
  return out;
}

}  // namespace

NttTables::NttTables(std::size_t size, const Modulus& mod)
    : NttTables(size, mod, arith::find_root(size, mod)) {}

NttTables::NttTables(std::size_t size, const Modulus& mod, u64 root) : size_(size), mod_(mod), root_(root) {
  if (!is_pow2(size)) raise(Errc::bad_length, "NTT size must be a power of two: " + std::to_string(size));
  if ((mod.value() - 1) % size != 0) raise(Errc::order_not_dividing, "NTT size does not divide q-1");
  const std::size_t half = std::max<std::size_t>(size / 2, 1);
  fwd_.resize(half);
  inv_.resize(half);
  const u64 inv_root = arith::inv_mod(root, mod);
  u64 w = 1, wi = 1;
  for (std::size_t k = 0; k < half; ++k) {
    fwd_[k] = make_mul_const(w, mod);
    inv_[k] = make_mul_const(wi, mod);
    w = mul_mod(w, root, mod);
    wi = mul_mod(wi, inv_root, mod);
  }
  inv_size_ = make_mul_const(arith::inv_mod(size % mod.value(), mod), mod);
}

void NttTables::forward_to_bitrev(u64* a) const {
  const u64 q = mod_.value();
  for (std::size_t len = size_ / 2; len >= 1; len >>= 1) {
    const std::size_t stride = size_ / (2 * len);
    for (std::size_t s = 0; s < size_; s += 2 * len) {
      u64* x = a + s;
      u64* y = a + s + len;
      for (std::size_t j = 0; j < len; ++j) {
        const u64 u = x[j];
        const u64 v = y[j];
        const u64 sum = u + v;
        x[j] = sum >= q ? sum - q : sum;
        y[j] = mul_mod_const(u >= v ? u - v : u + q - v, fwd_[j * stride], q);
      }
    }
  }
}

void NttTables::inverse_from_bitrev(u64* a, bool scale) const {
  const u64 q = mod_.value();
  for (std::size_t len = 1; len < size_; len <<= 1) {
    const std::size_t stride = size_ / (2 * len);
    for (std::size_t s = 0; s < size_; s += 2 * len) {
      u64* x = a + s;
      u64* y = a + s + len;
      for (std::size_t j = 0; j < len; ++j) {
        const u64 u = x[j];
        const u64 v = mul_mod_const(y[j], inv_[j * stride], q);
        const u64 sum = u + v;
        x[j] = sum >= q ? sum - q : sum;
        y[j] = u >= v ? u - v : u + q - v;
      }
    }
  }
  if (scale) {
    for (std::size_t i = 0; i < size_; ++i) a[i] = mul_mod_const(a[i], inv_size_, q);
  }
}

bool NttTables::operator==(const NttTables& o) const {
  auto same = [](const std::vector<MulConst>& x, const std::vector<MulConst>& y) {
    return std::equal(x.begin(), x.end(), y.begin(), y.end(), [](const MulConst& a, const MulConst& b) {
      return a.operand == b.operand && a.quotient == b.quotient;
    });
  };
  return size_ == o.size_ && mod_ == o.mod_ && root_ == o.root_ && same(fwd_, o.fwd_) && same(inv_, o.inv_);
}

void bit_reverse_permute(std::span<u64> a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
}

std::vector<u64> ntt_pow2(std::span<const u64> values, const NttTables& tables, Direction dir) {
  if (!is_pow2(values.size()) || values.size() != tables.size()) {
    raise(Errc::bad_length, "ntt_pow2: input length " + std::to_string(values.size()));
  }
  std::vector<u64> a(values.begin(), values.end());
  if (dir == Direction::forward) {
    tables.forward_to_bitrev(a.data());
    bit_reverse_permute(a);
  } else {
    bit_reverse_permute(a);
    tables.inverse_from_bitrev(a.data());
  }
  return a;
}

std::size_t next_pow2(std::size_t x) {
  std::size_t p = 1;
  while (p < x) p <<= 1;
  return p;
}

std::vector<std::int64_t> cyclotomic_poly_int(u64 m) {
  if (m == 0) throw std::invalid_argument("cyclotomic_poly: m must be positive");
  std::vector<std::int64_t> phi = {-1, 1};
  u64 rad = 1;
  for (u64 r : arith::prime_factors(m)) {
    phi = exact_div(substitute_power(phi, r), phi);
    rad *= r;
  }
  return substitute_power(phi, m / rad);
}

std::vector<u64> cyclotomic_poly(u64 m, const Modulus& mod) {
  const auto ints = cyclotomic_poly_int(m);
  std::vector<u64> out(ints.size());
  for (std::size_t i = 0; i < ints.size(); ++i) out[i] = arith::from_signed(ints[i], mod);
  return out;
}

BluesteinPlan::BluesteinPlan(u64 m, const Modulus& mod)
    : m_(m),
      pad_(next_pow2(2 * m - 1)),
      n_(arith::euler_phi(m)),
      mod_(mod),
      psi_(0),
      omega_(0),
      tf2_(pad_, mod) {
  if (m < 2) throw std::invalid_argument("BluesteinPlan: m must be at least 2");
  omega_ = arith::find_root(m, mod);
  psi_ = (m % 2 == 0) ? arith::find_root(2 * m, mod) : pow_mod(omega_, (m + 1) / 2, mod);
  if (m % 2 == 0) omega_ = mul_mod(psi_, psi_, mod);

  const u64 psi_inv = arith::inv_mod(psi_, mod);
  const u64 inv_pad = arith::inv_mod(pad_ % mod.value(), mod);
  const u64 inv_m = arith::inv_mod(m % mod.value(), mod);
  tf1_.resize(m);
  std::vector<u64> tf1_inv(m);
  for (u64 k = 0; k < m; ++k) {
    const u64 e = (k * k) % (2 * m);
    tf1_[k] = pow_mod(psi_, e, mod);
    tf1_inv[k] = pow_mod(psi_inv, e, mod);
  }
  chirp_in_ = const_table(tf1_, mod);
  chirp_inv_in_ = const_table(tf1_inv, mod);
  std::vector<u64> out_tab(m), inv_out_tab(m);
  for (u64 k = 0; k < m; ++k) {
    out_tab[k] = mul_mod(tf1_[k], inv_pad, mod);
    inv_out_tab[k] = mul_mod(mul_mod(tf1_inv[k], inv_pad, mod), inv_m, mod);
  }
  chirp_out_ = const_table(out_tab, mod);
  chirp_inv_out_ = const_table(inv_out_tab, mod);

  // D_pad[t] = psi^(-t^2) for t < m, zero above; the inverse direction swaps psi.
  dpad_hat_.assign(pad_, 0);
  dpad_inv_hat_.assign(pad_, 0);
  for (u64 t = 0; t < m; ++t) {
    dpad_hat_[t] = tf1_inv[t];
    dpad_inv_hat_[t] = tf1_[t];
  }
  tf2_.forward_to_bitrev(dpad_hat_.data());
  tf2_.forward_to_bitrev(dpad_inv_hat_.data());
  dpad_hat_c_ = const_table(dpad_hat_, mod);
  dpad_inv_hat_c_ = const_table(dpad_inv_hat_, mod);

  in_zmstar_.resize(m);
  zmstar_prefix_.resize(m);
  filter_target_.resize(m);
  std::uint32_t count = 0;
  for (u64 i = 0; i < m; ++i) {
    in_zmstar_[i] = arith::gcd(i, m) == 1 ? 1 : 0;
    zmstar_prefix_[i] = count;
    count += in_zmstar_[i];
  }
  for (u64 i = 0; i < m; ++i) {
    filter_target_[i] = in_zmstar_[i] ? zmstar_prefix_[i] : static_cast<std::uint32_t>(n_);
    if (in_zmstar_[i]) positions_.push_back(static_cast<std::uint32_t>(i));
  }

  phi_ = cyclotomic_poly(m, mod);
  for (std::size_t j = 0; j < n_; ++j) {
    if (phi_[j] != 0) phi_terms_.emplace_back(static_cast<std::uint32_t>(j), arith::neg_mod(phi_[j], mod));
  }
}

bool BluesteinPlan::operator==(const BluesteinPlan& o) const {
  return m_ == o.m_ && pad_ == o.pad_ && n_ == o.n_ && mod_ == o.mod_ && psi_ == o.psi_ && tf1_ == o.tf1_ &&
         tf2_ == o.tf2_ && dpad_hat_ == o.dpad_hat_ && dpad_inv_hat_ == o.dpad_inv_hat_ &&
         in_zmstar_ == o.in_zmstar_ && zmstar_prefix_ == o.zmstar_prefix_ && phi_ == o.phi_;
}

void BluesteinPlan::inject_fault() {
  const u64 bad = add_mod(tf1_[1], 1, mod_);
  tf1_[1] = bad;
  chirp_in_[1] = make_mul_const(bad, mod_);
}

void bluestein_dft(std::span<const u64> in, std::span<u64> out, const BluesteinPlan& plan, Direction dir,
                   std::span<u64> scratch) {
  const std::size_t m = plan.m_;
  if (in.size() > m) raise(Errc::bad_length, "bluestein_dft: input longer than m");
  if (out.size() != m) raise(Errc::bad_length, "bluestein_dft: output length must be m");
  if (scratch.size() < plan.pad_) raise(Errc::bad_length, "bluestein_dft: scratch too small");
  metrics::ScopedTimer timer(metrics::Component::transform);
  const u64 q = plan.mod_.value();
  const bool fwd = dir == Direction::forward;
  const auto& chirp_in = fwd ? plan.chirp_in_ : plan.chirp_inv_in_;
  const auto& chirp_out = fwd ? plan.chirp_out_ : plan.chirp_inv_out_;
  const auto& kernel = fwd ? plan.dpad_hat_c_ : plan.dpad_inv_hat_c_;
  u64* buf = scratch.data();

  for (std::size_t k = 0; k < in.size(); ++k) buf[k] = mul_mod_const(in[k], chirp_in[k], q);
  std::fill(buf + in.size(), buf + plan.pad_, u64{0});
  plan.tf2_.forward_to_bitrev(buf);
  for (std::size_t i = 0; i < plan.pad_; ++i) buf[i] = mul_mod_const(buf[i], kernel[i], q);
  plan.tf2_.inverse_from_bitrev(buf, false);
  // Linear convolution has support [0, 2m-2]; fold the part above m back onto [0, m-2].
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const u64 s = buf[j] + buf[j + m];
    out[j] = mul_mod_const(s >= q ? s - q : s, chirp_out[j], q);
  }
  out[m - 1] = mul_mod_const(buf[m - 1], chirp_out[m - 1], q);
}

std::vector<u64> bluestein_dft(std::span<const u64> in, const BluesteinPlan& plan, Direction dir) {
  if (in.size() != plan.m()) raise(Errc::bad_length, "bluestein_dft: input length must be m");
  std::vector<u64> out(plan.m());
  std::vector<u64> scratch(plan.scratch_size());
  bluestein_dft(in, out, plan, dir, scratch);
  return out;
}

void zmstar_filter(std::span<const u64> evals, std::span<u64> out, const BluesteinPlan& plan) {
  if (evals.size() != plan.m_) raise(Errc::bad_length, "zmstar_filter: input length must be m");
  if (out.size() < plan.n_ + 1) raise(Errc::bad_length, "zmstar_filter: output needs n+1 entries");
  const std::uint32_t* target = plan.filter_target_.data();
  for (std::size_t i = 0; i < evals.size(); ++i) out[target[i]] = evals[i];
}

std::vector<u64> zmstar_filter(std::span<const u64> evals, const BluesteinPlan& plan) {
  std::vector<u64> out(plan.n() + 1);
  zmstar_filter(evals, out, plan);
  out.pop_back();
  return out;
}

std::vector<u64> zmstar_filter_reference(std::span<const u64> evals, const BluesteinPlan& plan) {
  if (evals.size() != plan.m()) raise(Errc::bad_length, "zmstar_filter_reference: input length must be m");
  std::vector<u64> out(plan.n());
  const u64 m = plan.m();
  for (u64 i = 0, j = 0; i < m; ++i) {
    if (arith::gcd(i, m) == 1) out[j++] = evals[i];
  }
  return out;
}

std::vector<u64> zmstar_scatter(std::span<const u64> compact, const BluesteinPlan& plan) {
  if (compact.size() != plan.n()) raise(Errc::bad_length, "zmstar_scatter: input length must be n");
  std::vector<u64> out(plan.m(), 0);
  const auto& pos = plan.zmstar_positions();
  for (std::size_t j = 0; j < compact.size(); ++j) out[pos[j]] = compact[j];
  return out;
}

void to_eval(std::span<const u64> coeffs, std::span<u64> out, const BluesteinPlan& plan, std::span<u64> scratch) {
  const std::size_t m = plan.m(), n = plan.n();
  if (coeffs.size() != n || out.size() != n) raise(Errc::bad_length, "to_eval: lengths must equal n");
  if (scratch.size() < 2 * plan.scratch_size()) raise(Errc::bad_length, "to_eval: scratch too small");
  std::span<u64> evals = scratch.subspan(plan.scratch_size(), m + 1);
  bluestein_dft(coeffs, evals.first(m), plan, Direction::forward, scratch.first(plan.scratch_size()));
  // The filter writes discarded points into index n, so stage through the scratch tail.
  std::span<u64> compact = scratch.first(n + 1);
  zmstar_filter(evals.first(m), compact, plan);
  std::copy(compact.begin(), compact.begin() + n, out.begin());
}

void from_eval(std::span<const u64> compact, std::span<u64> out, const BluesteinPlan& plan,
               std::span<u64> scratch) {
  const std::size_t m = plan.m_, n = plan.n_;
  if (compact.size() != n || out.size() != n) raise(Errc::bad_length, "from_eval: lengths must equal n");
  if (scratch.size() < 2 * plan.scratch_size()) raise(Errc::bad_length, "from_eval: scratch too small");
  std::span<u64> full = scratch.subspan(plan.scratch_size(), m);
  std::fill(full.begin(), full.end(), u64{0});
  const auto& pos = plan.positions_;
  for (std::size_t j = 0; j < n; ++j) full[pos[j]] = compact[j];
  bluestein_dft(full, full, plan, Direction::inverse, scratch.first(plan.scratch_size()));
  // Exact reduction modulo the monic Phi_m: x^n = -sum phi_j x^j.
  const Modulus& mod = plan.mod_;
  for (std::size_t k = m; k-- > n;) {
    const u64 c = full[k];
    if (c == 0) continue;
    const std::size_t base = k - n;
    for (const auto& [j, neg_phi] : plan.phi_terms_) {
      full[base + j] = add_mod(full[base + j], mul_mod(c, neg_phi, mod), mod);
    }
  }
  std::copy(full.begin(), full.begin() + n, out.begin());
}

std::vector<u64> to_eval(std::span<const u64> coeffs, const BluesteinPlan& plan) {
  std::vector<u64> out(plan.n());
  std::vector<u64> scratch(2 * plan.scratch_size());
  to_eval(coeffs, out, plan, scratch);
  return out;
}

std::vector<u64> from_eval(std::span<const u64> compact, const BluesteinPlan& plan) {
  std::vector<u64> out(plan.n());
  std::vector<u64> scratch(2 * plan.scratch_size());
  from_eval(compact, out, plan, scratch);
  return out;
}

std::shared_ptr<const BluesteinPlan> PlanCache::get(u64 m, const Modulus& mod) {
  std::lock_guard<std::mutex> lock(mu_);
  const auto key = std::make_pair(m, mod.value());
  auto it = plans_.find(key);
  if (it != plans_.end()) return it->second;
  auto plan = std::make_shared<const BluesteinPlan>(m, mod);
  plans_.emplace(key, plan);
  ++builds_[key];
  ++build_counter_;
  return plan;
}

std::size_t PlanCache::build_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return build_counter_;
}

std::size_t PlanCache::build_count(u64 m, u64 q) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = builds_.find({m, q});
  return it == builds_.end() ? 0 : it->second;
}

std::size_t PlanCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return plans_.size();
}

std::shared_ptr<const BluesteinPlan> build_plan(u64 m, const Modulus& mod, PlanCache& cache) {
  return cache.get(m, mod);
}

}  // namespace ufhe::transform
