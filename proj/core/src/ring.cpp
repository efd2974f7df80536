#include "ufhe/ring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ufhe/error.hpp"
#include "ufhe/metrics.hpp"

namespace ufhe::ring {

using arith::Modulus;

namespace {

void check_compatible(const RnsPoly& a, const RnsPoly& b) {
  if (a.rep() != b.rep()) raise(Errc::rep_mismatch, "operands are in different representations");
  if (a.context() != b.context() || a.active() != b.active()) {
    raise(Errc::basis_mismatch, "operands use different prime sets");
  }
}

void kernel_row(ElementOp op, const u64* x, const u64* y, u64* out, std::size_t width, const Modulus& mod) {
  const u64 q = mod.value();
  switch (op) {
    case ElementOp::add:
      for (std::size_t j = 0; j < width; ++j) {
        const u64 s = x[j] + y[j];
        out[j] = s >= q ? s - q : s;
      }
      break;
    case ElementOp::sub:
      for (std::size_t j = 0; j < width; ++j) out[j] = x[j] >= y[j] ? x[j] - y[j] : x[j] + q - y[j];
      break;
    case ElementOp::mul:
      for (std::size_t j = 0; j < width; ++j) out[j] = arith::mul_mod(x[j], y[j], mod);
      break;
  }
}

struct Expansion {
  double mul;
  double automorphism;
};

// Streams x^k mod Phi_m and accumulates weighted column sums of |coefficients|.
Expansion compute_expansion(u64 m, std::size_t n, const std::vector<std::int64_t>& phi) {
  const std::size_t prod_terms = 2 * n - 1;
  const std::size_t total = std::max<std::size_t>(prod_terms, m);
  std::vector<std::int64_t> cur(n, 0);
  std::vector<double> col_mul(n, 0.0), col_auto(n, 0.0);
  std::vector<std::pair<std::size_t, std::int64_t>> terms;
  for (std::size_t j = 0; j < n; ++j) {
    if (phi[j] != 0) terms.emplace_back(j, phi[j]);
  }
  for (std::size_t k = 0; k < total; ++k) {
    if (k < n) {
      std::fill(cur.begin(), cur.end(), 0);
      cur[k] = 1;
    } else {
      const std::int64_t top = cur[n - 1];
      for (std::size_t j = n - 1; j > 0; --j) cur[j] = cur[j - 1];
      cur[0] = 0;
      if (top != 0) {
        for (const auto& [j, c] : terms) {
          const i128 v = static_cast<i128>(cur[j]) - static_cast<i128>(top) * c;
          if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
            throw std::overflow_error("ring expansion: coefficient overflow");
          }
          cur[j] = static_cast<std::int64_t>(v);
        }
      }
    }
    const double w = static_cast<double>(std::min(k + 1, prod_terms - std::min(k, prod_terms)));
    for (std::size_t j = 0; j < n; ++j) {
      if (cur[j] == 0) continue;
      const double mag = std::fabs(static_cast<double>(cur[j]));
      if (k < prod_terms) col_mul[j] += w * mag;
      if (k < m) col_auto[j] += mag;
    }
  }
  return {*std::max_element(col_mul.begin(), col_mul.end()), *std::max_element(col_auto.begin(), col_auto.end())};
}

thread_local Workspace t_default_workspace;
thread_local Workspace* t_bound_workspace = nullptr;

}  // namespace

RingContext::RingContext(u64 m, arith::RnsBasis basis, transform::PlanCache& cache)
    : m_(m), n_(arith::euler_phi(m)), basis_(std::move(basis)) {
  if (basis_.empty()) throw std::invalid_argument("RingContext: empty basis");
  plans_.reserve(basis_.size());
  for (const auto& q : basis_.primes()) plans_.push_back(cache.get(m, q));
  level_bases_.reserve(basis_.size() + 1);
  for (std::size_t c = 0; c <= basis_.size(); ++c) level_bases_.push_back(basis_.prefix(c));
  phi_int_ = transform::cyclotomic_poly_int(m);
  zmstar_index_.assign(m, static_cast<std::uint32_t>(n_));
  const auto& pos = plans_[0]->zmstar_positions();
  for (std::size_t j = 0; j < pos.size(); ++j) zmstar_index_[pos[j]] = static_cast<std::uint32_t>(j);
  scratch_size_ = 2 * plans_[0]->scratch_size();
  const Expansion e = compute_expansion(m, n_, phi_int_);
  mul_expansion_ = e.mul;
  auto_expansion_ = e.automorphism;
}

std::vector<std::uint32_t> RingContext::automorphism_map(u64 t) const {
  if (arith::gcd(t % m_, m_) != 1) raise(Errc::not_coprime, "automorphism exponent not coprime to m");
  const auto& pos = plans_[0]->zmstar_positions();
  std::vector<std::uint32_t> perm(n_);
  for (std::size_t j = 0; j < n_; ++j) {
    perm[j] = zmstar_index_[static_cast<std::size_t>((static_cast<u128>(t) * pos[j]) % m_)];
  }
  return perm;
}

RnsPoly::RnsPoly(RingPtr ctx, std::size_t active, Rep rep) : ctx_(std::move(ctx)), rep_(rep) {
  if (!ctx_ || active == 0 || active > ctx_->prime_count()) {
    throw std::invalid_argument("RnsPoly: active prime count out of range");
  }
  rows_.assign(active, std::vector<u64>(ctx_->n(), 0));
}

void StageBuffer::gather(const RnsPoly& p) {
  rows_ = p.active();
  width_ = p.width();
  data_.resize(rows_ * width_);
  for (std::size_t i = 0; i < rows_; ++i) {
    const auto src = p.row(i);
    std::copy(src.begin(), src.end(), data_.begin() + static_cast<std::ptrdiff_t>(i * width_));
  }
}

void StageBuffer::scatter(RnsPoly& p) const {
  for (std::size_t i = 0; i < rows_; ++i) {
    auto dst = p.row_mut(i);
    std::copy(data_.begin() + static_cast<std::ptrdiff_t>(i * width_),
              data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * width_), dst.begin());
  }
}

void Workspace::reserve(std::size_t rows, std::size_t width, std::size_t transform_scratch) {
  a.reserve(rows, width);
  b.reserve(rows, width);
  if (scratch.size() < transform_scratch) scratch.resize(transform_scratch);
}

std::span<u64> Workspace::transform_scratch(std::size_t size) {
  if (scratch.size() < size) scratch.resize(size);
  return std::span<u64>(scratch.data(), size);
}

Workspace& Workspace::current() { return t_bound_workspace ? *t_bound_workspace : t_default_workspace; }

Workspace* Workspace::bind(Workspace* ws) {
  Workspace* prev = t_bound_workspace;
  t_bound_workspace = ws;
  return prev;
}

RnsPoly elementwise(ElementOp op, const RnsPoly& a, const RnsPoly& b) {
  check_compatible(a, b);
  if (op == ElementOp::mul && a.rep() != Rep::eval) raise(Errc::rep_mismatch, "mul requires eval rep");
  metrics::ScopedTimer timer(metrics::Component::elementwise);
  Workspace& ws = Workspace::current();
  ws.a.gather(a);
  ws.b.gather(b);
  const std::size_t rows = ws.a.rows(), width = ws.a.width();
  for (std::size_t i = 0; i < rows; ++i) kernel_row(op, ws.a.row(i), ws.b.row(i), ws.a.row(i), width, a.prime(i));
  RnsPoly out(a.context(), rows, a.rep());
  ws.a.scatter(out);
  return out;
}

RnsPoly elementwise_reference(ElementOp op, const RnsPoly& a, const RnsPoly& b) {
  check_compatible(a, b);
  if (op == ElementOp::mul && a.rep() != Rep::eval) raise(Errc::rep_mismatch, "mul requires eval rep");
  RnsPoly out(a.context(), a.active(), a.rep());
  for (std::size_t i = 0; i < a.active(); ++i) {
    kernel_row(op, a.row(i).data(), b.row(i).data(), out.row_mut(i).data(), a.width(), a.prime(i));
  }
  return out;
}

RnsPoly negate(const RnsPoly& a) {
  RnsPoly out(a.context(), a.active(), a.rep());
  for (std::size_t i = 0; i < a.active(); ++i) {
    const auto src = a.row(i);
    auto dst = out.row_mut(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = arith::neg_mod(src[j], a.prime(i));
  }
  return out;
}

RnsPoly mul_scalar(const RnsPoly& a, std::int64_t c) {
  std::vector<u64> per(a.active());
  for (std::size_t i = 0; i < a.active(); ++i) per[i] = arith::from_signed(c, a.prime(i));
  return mul_scalar_rns(a, per);
}

RnsPoly mul_scalar_rns(const RnsPoly& a, std::span<const u64> c) {
  metrics::ScopedTimer timer(metrics::Component::elementwise);
  RnsPoly out(a.context(), a.active(), a.rep());
  for (std::size_t i = 0; i < a.active(); ++i) {
    const auto w = arith::make_mul_const(c[i], a.prime(i));
    const u64 q = a.prime(i).value();
    const auto src = a.row(i);
    auto dst = out.row_mut(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = arith::mul_mod_const(src[j], w, q);
  }
  return out;
}

RnsPoly convert(const RnsPoly& a, Rep target) {
  if (a.rep() == target) return a;
  const auto& ctx = *a.context();
  RnsPoly out(a.context(), a.active(), target);
  auto scratch = Workspace::current().transform_scratch(ctx.scratch_size());
  for (std::size_t i = 0; i < a.active(); ++i) {
    if (target == Rep::eval) {
      transform::to_eval(a.row(i), out.row_mut(i), ctx.plan(i), scratch);
    } else {
      transform::from_eval(a.row(i), out.row_mut(i), ctx.plan(i), scratch);
    }
  }
  return out;
}

RnsPoly drop_to(const RnsPoly& a, std::size_t active) {
  if (active == 0 || active > a.active()) raise(Errc::basis_too_small, "drop_to: invalid prime count");
  RnsPoly out(a.context(), active, a.rep());
  for (std::size_t i = 0; i < active; ++i) {
    const auto src = a.row(i);
    std::copy(src.begin(), src.end(), out.row_mut(i).begin());
  }
  return out;
}

RnsPoly from_signed(const RingPtr& ctx, std::size_t active, std::span<const std::int64_t> coeffs) {
  if (coeffs.size() > ctx->n()) raise(Errc::bad_length, "from_signed: degree exceeds n");
  RnsPoly out(ctx, active, Rep::coeff);
  for (std::size_t i = 0; i < active; ++i) {
    auto dst = out.row_mut(i);
    for (std::size_t j = 0; j < coeffs.size(); ++j) dst[j] = arith::from_signed(coeffs[j], ctx->prime(i));
  }
  return out;
}

std::vector<BigInt> compose(const RnsPoly& a) {
  if (a.rep() != Rep::coeff) raise(Errc::rep_mismatch, "compose requires coeff rep");
  metrics::ScopedTimer timer(metrics::Component::crt);
  const auto& basis = a.context()->level_basis(a.active());
  std::vector<BigInt> out(a.width());
  std::vector<u64> residues(a.active());
  for (std::size_t j = 0; j < a.width(); ++j) {
    for (std::size_t i = 0; i < a.active(); ++i) residues[i] = a.row(i)[j];
    out[j] = arith::crt_compose(residues, basis);
  }
  return out;
}

std::vector<std::int64_t> sample_error_coeffs(std::size_t count, Prng& rng) {
  // Cumulative table of the truncated discrete Gaussian over |x| in [0, kErrorBound].
  static const std::vector<u64> cdt = [] {
    std::vector<double> w(kErrorBound + 1);
    double total = 0;
    for (int x = 0; x <= kErrorBound; ++x) {
      w[x] = std::exp(-static_cast<double>(x) * x / (2 * kErrorSigma * kErrorSigma)) * (x == 0 ? 1.0 : 2.0);
      total += w[x];
    }
    std::vector<u64> table(kErrorBound + 1);
    double acc = 0;
    for (int x = 0; x <= kErrorBound; ++x) {
      acc += w[x] / total;
      table[x] = x == kErrorBound ? ~u64{0} : static_cast<u64>(std::ldexp(acc, 63)) << 1;
    }
    return table;
  }();
  std::vector<std::int64_t> out(count);
  for (auto& v : out) {
    const u64 u = rng.next();
    std::int64_t mag = 0;
    while (mag < kErrorBound && u >= cdt[static_cast<std::size_t>(mag)]) ++mag;
    v = (mag != 0 && (rng.next() & 1)) ? -mag : mag;
  }
  return out;
}

RnsPoly sample(SampleKind kind, const RingPtr& ctx, std::size_t active, Prng& rng) {
  const std::size_t n = ctx->n();
  switch (kind) {
    case SampleKind::uniform: {
      RnsPoly out(ctx, active, Rep::eval);
      for (std::size_t i = 0; i < active; ++i) {
        auto dst = out.row_mut(i);
        const u64 q = ctx->prime(i).value();
        for (auto& v : dst) v = rng.uniform(q);
      }
      return out;
    }
    case SampleKind::ternary: {
      std::vector<std::int64_t> c(n);
      for (auto& v : c) v = static_cast<std::int64_t>(rng.uniform(3)) - 1;
      return from_signed(ctx, active, c);
    }
    case SampleKind::error: {
      const auto c = sample_error_coeffs(n, rng);
      return from_signed(ctx, active, c);
    }
  }
  throw std::logic_error("sample: unknown kind");
}

RnsPoly sample(SampleKind kind, const RingPtr& ctx, std::size_t active, std::uint64_t seed) {
  Prng rng(seed);
  return sample(kind, ctx, active, rng);
}

namespace {

// delta with delta = r mod q_last, delta = 0 mod p, minimal magnitude, for every coefficient.
std::vector<i128> switch_offsets(std::span<const u64> last_row, const Modulus& q_last, u64 p) {
  const u64 q = q_last.value();
  const std::int64_t pp = static_cast<std::int64_t>(p);
  std::int64_t q_inv_p = 1;
  for (std::int64_t c = 1; c < pp; ++c) {
    if (static_cast<std::int64_t>((static_cast<u128>(q % p) * c) % p) == 1) {
      q_inv_p = c;
      break;
    }
  }
  std::vector<i128> delta(last_row.size());
  for (std::size_t j = 0; j < last_row.size(); ++j) {
    const std::int64_t r = arith::centered(last_row[j], q);
    // t = -r * q^{-1} mod p, centered, so that r + q t = 0 mod p.
    std::int64_t t = ((-(r % pp)) % pp + pp) % pp;
    t = static_cast<std::int64_t>((static_cast<i128>(t) * q_inv_p) % pp);
    if (t > pp / 2) t -= pp;
    delta[j] = static_cast<i128>(r) + static_cast<i128>(q) * t;
  }
  return delta;
}

u64 reduce_i128(i128 v, const Modulus& mod) {
  const u64 q = mod.value();
  i128 r = v % static_cast<i128>(q);
  if (r < 0) r += q;
  return static_cast<u64>(r);
}

}  // namespace

RnsPoly mod_switch_drop(const RnsPoly& a, u64 p) {
  if (a.rep() != Rep::coeff) raise(Errc::rep_mismatch, "mod_switch_drop expects coeff rep");
  if (a.active() < 2) raise(Errc::basis_too_small, "mod_switch_drop needs at least two primes");
  const std::size_t last = a.active() - 1;
  const Modulus& q_last = a.prime(last);
  const auto delta = switch_offsets(a.row(last), q_last, p);
  RnsPoly out(a.context(), last, Rep::coeff);
  for (std::size_t i = 0; i < last; ++i) {
    const Modulus& qi = a.prime(i);
    const auto w = arith::make_mul_const(arith::inv_mod(q_last.value() % qi.value(), qi), qi);
    const auto src = a.row(i);
    auto dst = out.row_mut(i);
    for (std::size_t j = 0; j < src.size(); ++j) {
      dst[j] = arith::mul_mod_const(arith::sub_mod(src[j], reduce_i128(delta[j], qi), qi), w, qi.value());
    }
  }
  return out;
}

RnsPoly mod_switch_drop_eval(const RnsPoly& a, u64 p) {
  if (a.rep() != Rep::eval) raise(Errc::rep_mismatch, "mod_switch_drop_eval expects eval rep");
  if (a.active() < 2) raise(Errc::basis_too_small, "mod_switch_drop needs at least two primes");
  const auto& ctx = *a.context();
  const std::size_t last = a.active() - 1;
  const Modulus& q_last = a.prime(last);
  auto scratch = Workspace::current().transform_scratch(ctx.scratch_size());
  std::vector<u64> last_coeffs(ctx.n());
  transform::from_eval(a.row(last), last_coeffs, ctx.plan(last), scratch);
  const auto delta = switch_offsets(last_coeffs, q_last, p);
  RnsPoly out(a.context(), last, Rep::eval);
  std::vector<u64> delta_i(ctx.n()), delta_eval(ctx.n());
  for (std::size_t i = 0; i < last; ++i) {
    const Modulus& qi = a.prime(i);
    for (std::size_t j = 0; j < delta.size(); ++j) delta_i[j] = reduce_i128(delta[j], qi);
    transform::to_eval(delta_i, delta_eval, ctx.plan(i), scratch);
    const auto w = arith::make_mul_const(arith::inv_mod(q_last.value() % qi.value(), qi), qi);
    const auto src = a.row(i);
    auto dst = out.row_mut(i);
    for (std::size_t j = 0; j < src.size(); ++j) {
      dst[j] = arith::mul_mod_const(arith::sub_mod(src[j], delta_eval[j], qi), w, qi.value());
    }
  }
  return out;
}

RnsPoly automorphism(const RnsPoly& a, u64 t) {
  if (a.rep() != Rep::eval) raise(Errc::rep_mismatch, "automorphism expects eval rep");
  const auto perm = a.context()->automorphism_map(t);
  RnsPoly out(a.context(), a.active(), Rep::eval);
  for (std::size_t i = 0; i < a.active(); ++i) {
    const auto src = a.row(i);
    auto dst = out.row_mut(i);
    for (std::size_t j = 0; j < perm.size(); ++j) dst[j] = src[perm[j]];
  }
  return out;
}

}  // namespace ufhe::ring
