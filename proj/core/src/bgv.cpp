#include "ufhe/bgv.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "ufhe/error.hpp"
#include "ufhe/metrics.hpp"

namespace ufhe::bgv {

using ring::Rep;
using ring::RnsPoly;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log2_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log2(1.0 + std::exp2(lo - hi));
}

double log2_abs(double x) { return x == 0 ? kNegInf : std::log2(std::fabs(x)); }

double log2_big(const BigInt& x) {
  if (x == 0) return kNegInf;
  BigInt a = x < 0 ? BigInt(-x) : x;
  const auto top = static_cast<long>(boost::multiprecision::msb(a));
  if (top < 60) return std::log2(a.convert_to<double>());
  const long shift = top - 52;
  BigInt head = a >> shift;
  return std::log2(head.convert_to<double>()) + static_cast<double>(shift);
}

slots::SlotUsage merge_usage(const slots::SlotUsage& a, const slots::SlotUsage& b, slots::OpTag tag) {
  if (a.mask.empty()) return {b.mask, tag};
  if (b.mask.empty()) return {a.mask, tag};
  slots::SlotUsage out{a.mask, tag};
  for (std::size_t i = 0; i < out.mask.size() && i < b.mask.size(); ++i) out.mask[i] |= b.mask[i];
  return out;
}

RnsPoly to_eval(const RnsPoly& a) { return a.rep() == Rep::eval ? a : ring::convert(a, Rep::eval); }

void require_same_level(const Ciphertext& a, const Ciphertext& b) {
  if (a.level() != b.level())
    raise(Errc::level_mismatch, "operands at " + std::to_string(a.level()) + " and " + std::to_string(b.level()) +
                                    " primes");
}

// acc += sum_{i,k} D_ik * key_ik where D_ik is digit k of (c mod q_i), embedded into every active prime.
void key_switch(const RnsPoly& c, const KswKey& key, const Context& ctx, RnsPoly& acc0, RnsPoly& acc1) {
  const auto& R = *ctx.ring();
  const std::size_t L = c.active(), n = R.n(), K = ctx.ks_digits();
  const int w = ctx.ks_digit_bits();
  const u64 mask = (u64{1} << w) - 1;
  if (key.b.size() < L * K) raise(Errc::basis_too_small, "key-switch key shorter than the ciphertext basis");
  auto& ws = ring::Workspace::current();
  auto scratch = ws.transform_scratch(R.scratch_size());
  std::vector<u64> coeffs(n), digit(n), dev(n);
  for (std::size_t i = 0; i < L; ++i) {
    transform::from_eval(c.row(i), coeffs, R.plan(i), scratch);
    for (std::size_t k = 0; k < K; ++k) {
      const int shift = w * static_cast<int>(k);
      u64 any = 0;
      for (std::size_t j = 0; j < n; ++j) {
        digit[j] = (coeffs[j] >> shift) & mask;
        any |= digit[j];
      }
      if (any == 0) continue;
      const std::size_t idx = i * K + k;
      for (std::size_t r = 0; r < L; ++r) {
        transform::to_eval(digit, dev, R.plan(r), scratch);
        metrics::ScopedTimer timer(metrics::Component::elementwise);
        const auto& q = R.prime(r);
        auto kb = key.b[idx].row(r);
        auto ka = key.a[idx].row(r);
        auto o0 = acc0.row_mut(r);
        auto o1 = acc1.row_mut(r);
        for (std::size_t j = 0; j < n; ++j) {
          o0[j] = arith::add_mod(o0[j], arith::mul_mod(dev[j], kb[j], q), q);
          o1[j] = arith::add_mod(o1[j], arith::mul_mod(dev[j], ka[j], q), q);
        }
      }
    }
  }
}

KswKey make_ksw(const Context& ctx, const RnsPoly& s, const RnsPoly& target, Prng& rng) {
  const auto& ring = ctx.ring();
  const std::size_t L = ctx.max_primes(), K = ctx.ks_digits();
  const auto p = static_cast<std::int64_t>(ctx.p());
  KswKey key;
  key.b.reserve(L * K);
  key.a.reserve(L * K);
  for (std::size_t i = 0; i < L; ++i) {
    const auto& qi = ring->prime(i);
    for (std::size_t k = 0; k < K; ++k) {
      RnsPoly a = ring::sample(ring::SampleKind::uniform, ring, L, rng);
      RnsPoly e = to_eval(ring::sample(ring::SampleKind::error, ring, L, rng));
      RnsPoly b = ring::add(ring::negate(ring::mul(a, s)), ring::mul_scalar(e, p));
      const u64 scale = arith::pow_mod(2, static_cast<u64>(ctx.ks_digit_bits()) * k, qi);
      auto row = b.row_mut(i);
      auto t = target.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) row[j] = arith::add_mod(row[j], arith::mul_mod(t[j], scale, qi), qi);
      key.b.push_back(std::move(b));
      key.a.push_back(std::move(a));
    }
  }
  return key;
}

Ciphertext map_parts(const Ciphertext& a, const auto& fn) {
  Ciphertext out;
  out.parts.reserve(a.parts.size());
  for (const auto& part : a.parts) out.parts.push_back(fn(part));
  out.log2_noise = a.log2_noise;
  out.usage = a.usage;
  return out;
}

}  // namespace

int security_estimate(std::size_t n, double log2_q) {
  // Maximum log2 Q for ternary secrets at 128/192/256 bits, by power-of-two dimension.
  struct Band {
    std::size_t n;
    double q128, q192, q256;
  };
  static constexpr std::array<Band, 6> bands{{{1024, 27, 19, 14},
                                              {2048, 54, 37, 29},
                                              {4096, 109, 75, 58},
                                              {8192, 218, 152, 118},
                                              {16384, 438, 305, 237},
                                              {32768, 881, 611, 476}}};
  const Band* band = nullptr;
  for (const auto& b : bands)
    if (b.n <= n) band = &b;
  if (band == nullptr) return 0;
  if (log2_q <= band->q256) return 256;
  if (log2_q <= band->q192) return 192;
  if (log2_q <= band->q128) return 128;
  return 0;
}

std::shared_ptr<const Context> Context::create(const ParamsSpec& spec, transform::PlanCache& cache) {
  if (spec.p < 2 || !arith::is_prime(spec.p)) raise(Errc::config, "plaintext modulus must be prime");
  if (spec.prime_bits < 20 || spec.prime_bits > 62) raise(Errc::config, "prime_bits outside [20, 62]");
  if (spec.ks_digit_bits < 1 || spec.ks_digit_bits >= spec.prime_bits - 1)
    raise(Errc::config, "ks_digit_bits outside [1, prime_bits - 1)");
  auto ctx = std::make_shared<Context>();
  ctx->spec_ = spec;
  ctx->slots_ = plain::SlotAlgebra::build(spec.p, spec.m, spec.slot_seed);
  const u64 pad = transform::next_pow2(2 * spec.m - 1);
  auto basis = arith::gen_ntt_primes(spec.m, pad, spec.prime_bits, spec.levels + 1, spec.p);
  ctx->ring_ = std::make_shared<ring::RingContext>(spec.m, std::move(basis), cache);

  const auto& basis_ref = ctx->ring_->basis();
  int max_bits = 0;
  ctx->log2_q_.assign(basis_ref.size() + 1, 0.0);
  for (std::size_t i = 0; i < basis_ref.size(); ++i) {
    max_bits = std::max(max_bits, basis_ref[i].bit_count());
    ctx->log2_q_[i + 1] = ctx->log2_q_[i] + std::log2(static_cast<double>(basis_ref[i].value()));
  }
  ctx->ks_digits_ = static_cast<std::size_t>((max_bits + spec.ks_digit_bits - 1) / spec.ks_digit_bits);

  const double p = static_cast<double>(spec.p);
  const double gamma = ctx->ring_->mul_expansion();
  ctx->log2_mul_exp_ = std::log2(gamma);
  ctx->log2_auto_exp_ = std::log2(ctx->ring_->auto_expansion());
  ctx->log2_fresh_ = std::log2((p - 1) / 2 + p * ring::kErrorBound * (2 * gamma + 1));
  ctx->log2_switch_add_ = std::log2((p + 1) / 2 * (1 + gamma));
  ctx->lambda_ = bgv::security_estimate(ctx->n(), ctx->log2_q_.back());
  return ctx;
}

double Context::log2_ks_noise(std::size_t primes) const {
  const double p = static_cast<double>(spec_.p);
  const double digit_max = std::exp2(spec_.ks_digit_bits) - 1;
  return std::log2(p * static_cast<double>(primes * ks_digits_) * ring_->mul_expansion() * digit_max *
                   ring::kErrorBound);
}

KeySet keygen(const ContextPtr& ctx, std::uint64_t seed) {
  const auto& ring = ctx->ring();
  const std::size_t L = ctx->max_primes();
  Prng root(seed);
  KeySet ks;
  Prng srng = root.split(1);
  ks.sk.s = to_eval(ring::sample(ring::SampleKind::ternary, ring, L, srng));

  Prng prng = root.split(2);
  ks.pk.a = ring::sample(ring::SampleKind::uniform, ring, L, prng);
  RnsPoly e = to_eval(ring::sample(ring::SampleKind::error, ring, L, prng));
  ks.pk.b = ring::add(ring::negate(ring::mul(ks.pk.a, ks.sk.s)),
                      ring::mul_scalar(e, static_cast<std::int64_t>(ctx->p())));

  Prng rrng = root.split(3);
  ks.relin = make_ksw(*ctx, ks.sk.s, ring::mul(ks.sk.s, ks.sk.s), rrng);

  const auto& alg = ctx->slots();
  if (alg.cyclic()) {
    for (std::size_t step = 1; step < alg.l(); step <<= 1) {
      for (const auto signed_step : {static_cast<std::int64_t>(step), -static_cast<std::int64_t>(step)}) {
        const u64 t = alg.rotation_exponent(signed_step);
        if (ks.galois.keys.count(t) != 0) continue;
        ks.galois.keys.emplace(t, make_galois_key(ctx, ks.sk, t, splitmix64(seed ^ (0x6a1u + t))));
      }
    }
  }
  return ks;
}

KswKey make_galois_key(const ContextPtr& ctx, const SecretKey& sk, u64 t, std::uint64_t seed) {
  Prng rng = Prng(seed).split(4);
  KswKey key = make_ksw(*ctx, sk.s, ring::automorphism(sk.s, t), rng);
  key.galois_exponent = t;
  return key;
}

Plaintext::Plaintext(const ContextPtr& ctx, plain::Poly coeffs, slots::SlotUsage usage)
    : coeffs_(std::move(coeffs)), usage_(std::move(usage)) {
  const u64 p = ctx->p();
  if (coeffs_.size() > ctx->n()) raise(Errc::bad_length, "plaintext degree exceeds n");
  coeffs_.resize(ctx->n(), 0);
  std::vector<std::int64_t> lifted(coeffs_.size());
  for (std::size_t j = 0; j < coeffs_.size(); ++j) {
    coeffs_[j] %= p;
    lifted[j] = arith::centered(coeffs_[j], p);
    norm_ = std::max<u64>(norm_, static_cast<u64>(std::llabs(lifted[j])));
    if (j > 0 && coeffs_[j] != 0) constant_ = false;
  }
  eval_ = ring::convert(ring::from_signed(ctx->ring(), ctx->max_primes(), lifted), Rep::eval);
}

Plaintext encode(const ContextPtr& ctx, std::span<const u64> values) {
  return encode(ctx, values, slots::SlotUsage::first(ctx->l(), values.size()));
}

Plaintext encode(const ContextPtr& ctx, std::span<const u64> values, slots::SlotUsage usage) {
  const std::size_t l = ctx->l();
  if (values.size() > l)
    raise(Errc::wrong_slot_count, std::to_string(values.size()) + " values for " + std::to_string(l) + " slots");
  std::vector<u64> padded(l, 0);
  for (std::size_t i = 0; i < values.size(); ++i) padded[i] = values[i] % ctx->p();
  return Plaintext(ctx, ctx->slots().encode_scalars(padded), std::move(usage));
}

Plaintext encode_gf(const ContextPtr& ctx, std::span<const plain::GfElem> values) {
  return Plaintext(ctx, ctx->slots().encode(values), slots::SlotUsage::full(ctx->l()));
}

Plaintext constant_plaintext(const ContextPtr& ctx, u64 c) {
  return Plaintext(ctx, plain::Poly{c % ctx->p()}, slots::SlotUsage::full(ctx->l()));
}

Ciphertext encrypt(const Plaintext& pt, const PublicKey& pk, const ContextPtr& ctx, Prng& rng) {
  const auto& ring = ctx->ring();
  const std::size_t L = ctx->max_primes();
  const auto p = static_cast<std::int64_t>(ctx->p());
  RnsPoly u = to_eval(ring::sample(ring::SampleKind::ternary, ring, L, rng));
  RnsPoly e0 = to_eval(ring::sample(ring::SampleKind::error, ring, L, rng));
  RnsPoly e1 = to_eval(ring::sample(ring::SampleKind::error, ring, L, rng));
  Ciphertext ct;
  ct.parts.push_back(ring::add(ring::add(ring::mul(pk.b, u), ring::mul_scalar(e0, p)), pt.eval()));
  ct.parts.push_back(ring::add(ring::mul(pk.a, u), ring::mul_scalar(e1, p)));
  ct.log2_noise = ctx->log2_fresh_noise();
  ct.usage = pt.usage();
  return ct;
}

Ciphertext encrypt(const Plaintext& pt, const PublicKey& pk, const ContextPtr& ctx, std::uint64_t seed) {
  Prng rng(seed);
  return encrypt(pt, pk, ctx, rng);
}

Ciphertext trivial(const Plaintext& pt, const ContextPtr& ctx, std::size_t primes) {
  Ciphertext ct;
  ct.parts.push_back(ring::drop_to(pt.eval(), primes));
  ct.parts.emplace_back(ctx->ring(), primes, Rep::eval);
  ct.log2_noise = log2_abs(static_cast<double>(pt.norm()));
  ct.usage = pt.usage();
  return ct;
}

namespace {

RnsPoly phase(const Ciphertext& ct, const SecretKey& sk) {
  if (ct.parts.empty()) raise(Errc::config, "empty ciphertext");
  const std::size_t L = ct.level();
  const RnsPoly s = ring::drop_to(sk.s, L);
  RnsPoly v = ct.parts[0];
  RnsPoly s_pow = s;
  for (std::size_t k = 1; k < ct.parts.size(); ++k) {
    v = ring::add(v, ring::mul(ct.parts[k], s_pow));
    if (k + 1 < ct.parts.size()) s_pow = ring::mul(s_pow, s);
  }
  return ring::convert(v, Rep::coeff);
}

}  // namespace

plain::Poly decrypt_unchecked(const Ciphertext& ct, const SecretKey& sk, const ContextPtr& ctx) {
  const auto coeffs = ring::compose(phase(ct, sk));
  const BigInt p(ctx->p());
  plain::Poly out(coeffs.size());
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    BigInt r = coeffs[j] % p;
    if (r < 0) r += p;
    out[j] = r.convert_to<u64>();
  }
  return out;
}

plain::Poly decrypt(const Ciphertext& ct, const SecretKey& sk, const ContextPtr& ctx) {
  if (ct.log2_noise >= ctx->log2_threshold(ct.level()))
    raise(Errc::noise_budget_exhausted, "tracked noise 2^" + std::to_string(ct.log2_noise) + " exceeds threshold 2^" +
                                            std::to_string(ctx->log2_threshold(ct.level())));
  return decrypt_unchecked(ct, sk, ctx);
}

std::vector<u64> decrypt_slots(const Ciphertext& ct, const SecretKey& sk, const ContextPtr& ctx) {
  return ctx->slots().decode_scalars(decrypt(ct, sk, ctx));
}

double measure_log2_noise(const Ciphertext& ct, const SecretKey& sk, const ContextPtr&) {
  double out = kNegInf;
  for (const auto& c : ring::compose(phase(ct, sk))) out = std::max(out, log2_big(c));
  return out;
}

Ciphertext he_add(const Ciphertext& a, const Ciphertext& b, const ContextPtr&) {
  require_same_level(a, b);
  const Ciphertext& big = a.size() >= b.size() ? a : b;
  const Ciphertext& small = a.size() >= b.size() ? b : a;
  Ciphertext out;
  out.parts = big.parts;
  for (std::size_t k = 0; k < small.parts.size(); ++k) out.parts[k] = ring::add(big.parts[k], small.parts[k]);
  out.log2_noise = log2_add(a.log2_noise, b.log2_noise);
  out.usage = merge_usage(a.usage, b.usage, slots::OpTag::add);
  return out;
}

Ciphertext he_negate(const Ciphertext& a, const ContextPtr&) {
  return map_parts(a, [](const RnsPoly& x) { return ring::negate(x); });
}

Ciphertext he_sub(const Ciphertext& a, const Ciphertext& b, const ContextPtr& ctx) {
  return he_add(a, he_negate(b, ctx), ctx);
}

Ciphertext he_add_plain(const Ciphertext& a, const Plaintext& pt, const ContextPtr&) {
  Ciphertext out = a;
  out.parts[0] = ring::add(a.parts[0], ring::drop_to(pt.eval(), a.level()));
  out.log2_noise = log2_add(a.log2_noise, log2_abs(static_cast<double>(pt.norm())));
  out.usage = merge_usage(a.usage, pt.usage(), slots::OpTag::add);
  return out;
}

Ciphertext he_sub_plain(const Ciphertext& a, const Plaintext& pt, const ContextPtr&) {
  Ciphertext out = a;
  out.parts[0] = ring::sub(a.parts[0], ring::drop_to(pt.eval(), a.level()));
  out.log2_noise = log2_add(a.log2_noise, log2_abs(static_cast<double>(pt.norm())));
  out.usage = merge_usage(a.usage, pt.usage(), slots::OpTag::add);
  return out;
}

Ciphertext he_plain_sub(const Plaintext& pt, const Ciphertext& a, const ContextPtr& ctx) {
  return he_add_plain(he_negate(a, ctx), pt, ctx);
}

Ciphertext he_mul_plain(const Ciphertext& a, const Plaintext& pt, const ContextPtr& ctx) {
  const RnsPoly w = ring::drop_to(pt.eval(), a.level());
  Ciphertext out = map_parts(a, [&](const RnsPoly& x) { return ring::mul(x, w); });
  const double factor = log2_abs(static_cast<double>(pt.norm()));
  out.log2_noise = a.log2_noise + factor + (pt.is_constant() ? 0.0 : ctx->log2_mul_expansion());
  if (factor == kNegInf) out.log2_noise = kNegInf;
  out.usage = merge_usage(a.usage, pt.usage(), slots::OpTag::mul);
  return out;
}

Ciphertext he_add_scalar(const Ciphertext& a, std::int64_t c, const ContextPtr& ctx) {
  const auto p = static_cast<std::int64_t>(ctx->p());
  const std::int64_t cc = arith::centered(static_cast<u64>(((c % p) + p) % p), ctx->p());
  Ciphertext out = a;
  RnsPoly& c0 = out.parts[0];
  for (std::size_t i = 0; i < c0.active(); ++i) {
    const auto& q = c0.prime(i);
    const u64 v = arith::from_signed(cc, q);
    for (auto& x : c0.row_mut(i)) x = arith::add_mod(x, v, q);
  }
  out.log2_noise = log2_add(a.log2_noise, log2_abs(static_cast<double>(cc)));
  return out;
}

Ciphertext he_mul_scalar(const Ciphertext& a, std::int64_t c, const ContextPtr& ctx) {
  const auto p = static_cast<std::int64_t>(ctx->p());
  const std::int64_t cc = arith::centered(static_cast<u64>(((c % p) + p) % p), ctx->p());
  Ciphertext out = map_parts(a, [&](const RnsPoly& x) { return ring::mul_scalar(x, cc); });
  out.log2_noise = cc == 0 ? kNegInf : a.log2_noise + log2_abs(static_cast<double>(cc));
  return out;
}

Ciphertext he_mul_norelin(const Ciphertext& a, const Ciphertext& b, const ContextPtr& ctx) {
  require_same_level(a, b);
  if (a.size() != 2 || b.size() != 2) raise(Errc::config, "he_mul expects 2-part ciphertexts");
  Ciphertext out;
  out.parts.push_back(ring::mul(a.parts[0], b.parts[0]));
  out.parts.push_back(ring::add(ring::mul(a.parts[0], b.parts[1]), ring::mul(a.parts[1], b.parts[0])));
  out.parts.push_back(ring::mul(a.parts[1], b.parts[1]));
  out.log2_noise = a.log2_noise + b.log2_noise + ctx->log2_mul_expansion();
  out.usage = merge_usage(a.usage, b.usage, slots::OpTag::mul);
  return out;
}

Ciphertext relinearize(const Ciphertext& a, const KswKey& relin, const ContextPtr& ctx) {
  if (a.size() == 2) return a;
  if (a.size() != 3) raise(Errc::config, "relinearize expects a 3-part ciphertext");
  Ciphertext out;
  out.parts = {a.parts[0], a.parts[1]};
  key_switch(a.parts[2], relin, *ctx, out.parts[0], out.parts[1]);
  out.log2_noise = log2_add(a.log2_noise, ctx->log2_ks_noise(a.level()));
  out.usage = a.usage;
  return out;
}

Ciphertext he_mul(const Ciphertext& a, const Ciphertext& b, const KswKey& relin, const ContextPtr& ctx) {
  require_same_level(a, b);
  if (a.level() < 2) raise(Errc::out_of_levels, "no prime left to drop before multiplication");
  // Switching first keeps both inputs at the small post-switch noise, so products do not compound it.
  const Ciphertext x = mod_switch(a, ctx);
  if (&a == &b) return relinearize(he_mul_norelin(x, x, ctx), relin, ctx);
  return relinearize(he_mul_norelin(x, mod_switch(b, ctx), ctx), relin, ctx);
}

Ciphertext he_square(const Ciphertext& a, const KswKey& relin, const ContextPtr& ctx) {
  return he_mul(a, a, relin, ctx);
}

Ciphertext mod_switch(const Ciphertext& a, const ContextPtr& ctx) {
  if (a.level() < 2) raise(Errc::out_of_levels, "cannot drop the last prime");
  const double log2_q_last = std::log2(static_cast<double>(a.parts[0].prime(a.level() - 1).value()));
  Ciphertext out = map_parts(a, [&](const RnsPoly& x) { return ring::mod_switch_drop_eval(x, ctx->p()); });
  // |delta_k s^k| <= (p+1)/2 * gamma^k for k < parts.
  const double gamma = std::exp2(ctx->log2_mul_expansion());
  double series = 0, term = 1;
  for (std::size_t k = 0; k < a.size(); ++k, term *= gamma) series += term;
  const double additive = std::log2((static_cast<double>(ctx->p()) + 1) / 2 * series);
  out.log2_noise = log2_add(a.log2_noise - log2_q_last, additive);
  return out;
}

Ciphertext mod_switch_to(const Ciphertext& a, std::size_t primes, const ContextPtr& ctx) {
  if (primes == 0 || primes > a.level())
    raise(Errc::level_mismatch, "cannot switch from " + std::to_string(a.level()) + " to " + std::to_string(primes) +
                                    " primes");
  Ciphertext out = a;
  while (out.level() > primes) out = mod_switch(out, ctx);
  return out;
}

void match_levels(Ciphertext& a, Ciphertext& b, const ContextPtr& ctx) {
  const std::size_t target = std::min(a.level(), b.level());
  if (a.level() > target) a = mod_switch_to(a, target, ctx);
  if (b.level() > target) b = mod_switch_to(b, target, ctx);
}

Ciphertext apply_galois(const Ciphertext& a, u64 t, const KswKey& key, const ContextPtr& ctx) {
  if (a.size() != 2) raise(Errc::config, "automorphism expects a 2-part ciphertext");
  const std::size_t L = a.level();
  Ciphertext out;
  out.parts.push_back(ring::automorphism(a.parts[0], t));
  out.parts.emplace_back(ctx->ring(), L, Rep::eval);
  key_switch(ring::automorphism(a.parts[1], t), key, *ctx, out.parts[0], out.parts[1]);
  out.log2_noise = log2_add(a.log2_noise + ctx->log2_auto_expansion(), ctx->log2_ks_noise(L));
  out.usage.provenance = slots::OpTag::rotate;
  if (!a.usage.mask.empty()) {
    const auto perm = ctx->slots().slot_perm_for(t);
    out.usage.mask.resize(perm.size());
    for (std::size_t j = 0; j < perm.size(); ++j) out.usage.mask[j] = a.usage.mask[perm[j]];
  }
  return out;
}

std::vector<std::int64_t> rotation_hops(std::int64_t k, std::size_t l) {
  const auto L = static_cast<std::int64_t>(l);
  const std::int64_t r = ((k % L) + L) % L;
  if (r == 0) return {};
  // Forward hops for r or backward hops for l - r, whichever is shorter.
  const bool backward = std::popcount(static_cast<u64>(L - r)) < std::popcount(static_cast<u64>(r));
  std::int64_t rest = backward ? L - r : r;
  std::vector<std::int64_t> hops;
  for (std::int64_t step = 1; rest != 0; step <<= 1, rest >>= 1)
    if (rest & 1) hops.push_back(backward ? -step : step);
  return hops;
}

Ciphertext rotate(const Ciphertext& a, std::int64_t k, const GaloisKeys& keys, const ContextPtr& ctx) {
  const auto hops = rotation_hops(k, ctx->l());
  if (hops.empty()) return a;
  if (!ctx->slots().cyclic()) raise(Errc::missing_galois_key, "slot group is not cyclic");
  Ciphertext out = a;
  for (const auto step : hops) {
    const u64 t = ctx->slots().rotation_exponent(step);
    const auto it = keys.keys.find(t);
    if (it == keys.keys.end()) raise(Errc::missing_galois_key, "no key for exponent " + std::to_string(t));
    out = apply_galois(out, t, it->second, ctx);
  }
  return out;
}

double noise_budget(const Ciphertext& ct, const ContextPtr& ctx) {
  return std::max(0.0, ctx->log2_threshold(ct.level()) - std::max(ct.log2_noise, 0.0));
}

}  // namespace ufhe::bgv
