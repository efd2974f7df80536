#include "ufhe/compare.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "ufhe/error.hpp"

namespace ufhe::cmp {

std::string_view circuit_name(CircuitKind kind) noexcept {
  return kind == CircuitKind::bivariate ? "bivariate" : "univariate";
}

CircuitKind circuit_from_bgv(bgv::Circuit c) noexcept {
  return c == bgv::Circuit::bivariate ? CircuitKind::bivariate : CircuitKind::univariate;
}

std::string_view phase_name(Phase ph) noexcept {
  switch (ph) {
    case Phase::extraction: return "extraction";
    case Phase::lt_eq: return "lt_eq";
    case Phase::shift_mul: return "shift_mul";
    case Phase::shift_add: return "shift_add";
    case Phase::other: return "other";
  }
  return "unknown";
}

PhaseCounts& PhaseCounts::operator+=(const PhaseCounts& o) noexcept {
  nonscalar_mults += o.nonscalar_mults;
  scalar_mults += o.scalar_mults;
  adds += o.adds;
  rotations += o.rotations;
  return *this;
}

// ---- OpCounter

void OpCounter::bump(Phase ph, Kind kind, std::uint64_t n) noexcept {
  counts_[static_cast<std::size_t>(ph)][static_cast<std::size_t>(kind)].fetch_add(n, std::memory_order_relaxed);
}

PhaseCounts OpCounter::phase(Phase ph) const noexcept {
  const auto& c = counts_[static_cast<std::size_t>(ph)];
  return {c[0].load(), c[1].load(), c[2].load(), c[3].load()};
}

PhaseCounts OpCounter::total() const noexcept {
  PhaseCounts t;
  for (std::size_t i = 0; i < kPhaseCount; ++i) t += phase(static_cast<Phase>(i));
  return t;
}

void OpCounter::record_digit_job(CircuitKind kind, std::uint64_t mults) noexcept {
  const auto k = static_cast<std::size_t>(kind);
  jobs_[k].fetch_add(1, std::memory_order_relaxed);
  auto cur = max_job_[k].load();
  while (cur < mults && !max_job_[k].compare_exchange_weak(cur, mults)) {
  }
}

std::uint64_t OpCounter::max_digit_job(CircuitKind kind) const noexcept {
  return max_job_[static_cast<std::size_t>(kind)].load();
}

std::uint64_t OpCounter::digit_jobs(CircuitKind kind) const noexcept {
  return jobs_[static_cast<std::size_t>(kind)].load();
}

void OpCounter::reset() noexcept {
  for (auto& row : counts_)
    for (auto& c : row) c.store(0);
  for (auto& c : max_job_) c.store(0);
  for (auto& c : jobs_) c.store(0);
}

// ---- Evaluator

Evaluator::Evaluator(bgv::ContextPtr ctx, const bgv::KswKey& relin, const bgv::GaloisKeys& galois,
                     OpCounter* counter)
    : ctx_(std::move(ctx)), relin_(&relin), galois_(&galois), counter_(counter) {}

Evaluator Evaluator::fork() const {
  Evaluator e = *this;
  e.tally_ = 0;
  return e;
}

Ciphertext Evaluator::mul(const Ciphertext& a, const Ciphertext& b, Phase ph) {
  bump(ph, OpCounter::Kind::nonscalar);
  ++tally_;
  if (a.level() == b.level()) return bgv::he_mul(a, b, *relin_, ctx_);
  Ciphertext x = a, y = b;
  bgv::match_levels(x, y, ctx_);
  return bgv::he_mul(x, y, *relin_, ctx_);
}

Ciphertext Evaluator::square(const Ciphertext& a, Phase ph) { return mul(a, a, ph); }

Ciphertext Evaluator::mul_plain(const Ciphertext& a, const Plaintext& pt, Phase ph) {
  bump(ph, OpCounter::Kind::scalar);
  return bgv::he_mul_plain(a, pt, ctx_);
}

Ciphertext Evaluator::mul_scalar(const Ciphertext& a, std::int64_t c, Phase ph) {
  bump(ph, OpCounter::Kind::scalar);
  return bgv::he_mul_scalar(a, c, ctx_);
}

Ciphertext Evaluator::add(const Ciphertext& a, const Ciphertext& b, Phase ph) {
  bump(ph, OpCounter::Kind::add);
  if (a.level() == b.level()) return bgv::he_add(a, b, ctx_);
  Ciphertext x = a, y = b;
  bgv::match_levels(x, y, ctx_);
  return bgv::he_add(x, y, ctx_);
}

Ciphertext Evaluator::sub(const Ciphertext& a, const Ciphertext& b, Phase ph) {
  bump(ph, OpCounter::Kind::add);
  if (a.level() == b.level()) return bgv::he_sub(a, b, ctx_);
  Ciphertext x = a, y = b;
  bgv::match_levels(x, y, ctx_);
  return bgv::he_sub(x, y, ctx_);
}

Ciphertext Evaluator::add_plain(const Ciphertext& a, const Plaintext& pt, Phase ph) {
  bump(ph, OpCounter::Kind::add);
  return bgv::he_add_plain(a, pt, ctx_);
}

Ciphertext Evaluator::add_scalar(const Ciphertext& a, std::int64_t c, Phase ph) {
  bump(ph, OpCounter::Kind::add);
  return bgv::he_add_scalar(a, c, ctx_);
}

Ciphertext Evaluator::negate(const Ciphertext& a, Phase) { return bgv::he_negate(a, ctx_); }

Ciphertext Evaluator::rotate(const Ciphertext& a, std::int64_t k, Phase ph) {
  const auto l = static_cast<std::int64_t>(ctx_->l());
  if (((k % l) + l) % l == 0) return a;
  bump(ph, OpCounter::Kind::rotation);
  return bgv::rotate(a, k, *galois_, ctx_);
}

// ---- F_p interpolation

namespace {

u64 addp(u64 a, u64 b, u64 p) { return (a + b) % p; }
u64 subp(u64 a, u64 b, u64 p) { return (a + p - b) % p; }
u64 mulp(u64 a, u64 b, u64 p) { return static_cast<u64>(static_cast<u128>(a) * b % p); }
u64 powp(u64 a, u64 e, u64 p) {
  u64 r = 1 % p;
  a %= p;
  for (; e != 0; e >>= 1, a = mulp(a, a, p))
    if (e & 1) r = mulp(r, a, p);
  return r;
}

// Coefficients of the indicator of {x = a}: 1 - (x - a)^(p-1) = [k = 0] - a^(p-1-k) x^k.
std::vector<std::vector<u64>> indicator_basis(u64 p) {
  std::vector<std::vector<u64>> basis(p, std::vector<u64>(p, 0));
  for (u64 a = 0; a < p; ++a)
    for (u64 k = 0; k < p; ++k) {
      const u64 term = powp(a, p - 1 - k, p);  // 0^0 = 1
      basis[a][k] = subp(k == 0 ? 1 : 0, term, p);
    }
  return basis;
}

// Coefficients c[i][j] of the unique polynomial of degree < p in each variable matching f on F_p^2.
std::vector<std::vector<u64>> interpolate2(const std::vector<std::vector<u64>>& f, u64 p) {
  const auto basis = indicator_basis(p);
  std::vector<std::vector<u64>> c(p, std::vector<u64>(p, 0));
  for (u64 a = 0; a < p; ++a)
    for (u64 b = 0; b < p; ++b) {
      if (f[a][b] == 0) continue;
      for (u64 i = 0; i < p; ++i) {
        const u64 ai = mulp(f[a][b], basis[a][i], p);
        if (ai == 0) continue;
        for (u64 j = 0; j < p; ++j) c[i][j] = addp(c[i][j], mulp(ai, basis[b][j], p), p);
      }
    }
  return c;
}

u64 eval2(const std::vector<std::vector<u64>>& c, u64 x, u64 y, u64 p) {
  u64 acc = 0;
  for (std::size_t i = c.size(); i-- > 0;) acc = addp(mulp(acc, x, p), eval_fp(c[i], y, p), p);
  return acc;
}

}  // namespace

std::vector<u64> interpolate_fp(std::span<const u64> values, u64 p) {
  if (values.size() != p) raise(Errc::bad_length, "interpolation needs one value per residue");
  const auto basis = indicator_basis(p);
  std::vector<u64> c(p, 0);
  for (u64 a = 0; a < p; ++a)
    for (u64 k = 0; k < p; ++k) c[k] = addp(c[k], mulp(values[a] % p, basis[a][k], p), p);
  return c;
}

u64 eval_fp(std::span<const u64> coeffs, u64 x, u64 p) {
  u64 acc = 0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = addp(mulp(acc, x, p), coeffs[i], p);
  return acc;
}

// ---- DigitCircuit

DigitCircuit DigitCircuit::build(u64 p, CircuitKind kind) {
  if (p == 2) raise(Errc::unsupported_p, "digit circuits need an odd prime");
  if (p < 3 || !arith::is_prime(p)) raise(Errc::unsupported_p, "p must be an odd prime");
  DigitCircuit c;
  c.p_ = p;
  c.kind_ = kind;
  c.half_ = (p + 1) / 2;

  std::vector<std::vector<u64>> table(p, std::vector<u64>(p, 0));
  for (u64 x = 0; x < p; ++x)
    for (u64 y = 0; y < p; ++y) table[x][y] = x < y ? 1 : 0;
  c.bivar_ = interpolate2(table, p);

  // Same function in Z = x - y, S = x + y: x = (S + Z) / 2, y = (S - Z) / 2.
  std::vector<std::vector<u64>> zs(p, std::vector<u64>(p, 0));
  for (u64 z = 0; z < p; ++z)
    for (u64 s = 0; s < p; ++s) {
      const u64 x = mulp(addp(s, z, p), c.half_, p);
      const u64 y = mulp(subp(s, z, p), c.half_, p);
      zs[z][s] = table[x][y];
    }
  const auto f = interpolate2(zs, p);
  // LT(x,y) + LT(y,x) = Z^(p-1), so the even-Z part is Z^(p-1) / 2.
  for (u64 a = 0; a < p; a += 2)
    for (u64 b = 0; b < p; ++b) {
      const u64 expect = (a == p - 1 && b == 0) ? c.half_ : 0;
      if (f[a][b] != expect) raise(Errc::config, "LT even part has unexpected terms");
    }
  c.odd_.assign(p, std::vector<u64>((p - 1) / 2, 0));
  for (u64 a = 1; a < p; a += 2)
    for (u64 b = 0; b < p; ++b) c.odd_[b][(a - 1) / 2] = f[a][b];

  std::vector<u64> sign(p, 0);
  for (u64 d = 1; d <= (p - 1) / 2; ++d) sign[p - d] = 1;
  c.univar_ = interpolate_fp(sign, p);

  const u64 top = (p - 1) / 2;
  for (u64 x = 0; x < p; ++x)
    for (u64 y = 0; y < p; ++y) {
      const u64 want = x < y ? 1 : 0;
      if (c.eval_table(x, y) != want || c.eval_zs(x, y) != want)
        raise(Errc::config, "bivariate LT circuit disagrees with the indicator");
      if (x <= top && y <= top && c.eval_univar(subp(x, y, p)) != want)
        raise(Errc::config, "univariate LT circuit disagrees with the indicator");
      const u64 eq = subp(1, powp(subp(x, y, p), p - 1, p), p);
      if (eq != (x == y ? 1u : 0u)) raise(Errc::config, "EQ circuit disagrees with the indicator");
    }
  return c;
}

std::uint64_t DigitCircuit::nonscalar_mult_budget() const noexcept {
  const auto clog2 = [](u64 v) { return static_cast<std::uint64_t>(std::bit_width(v - 1)); };
  if (kind_ == CircuitKind::bivariate) return 2 * p_ - 6 + clog2(p_ - 1);
  const auto root = static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(p_))));
  return 2 * root + 2 * clog2(p_);
}

u64 DigitCircuit::eval_table(u64 x, u64 y) const { return eval2(bivar_, x % p_, y % p_, p_); }

u64 DigitCircuit::eval_zs(u64 x, u64 y) const {
  const u64 z = subp(x, y, p_), s = addp(x, y, p_), t = mulp(z, z, p_);
  u64 g = 0;
  for (std::size_t b = odd_.size(); b-- > 0;) g = addp(mulp(g, s, p_), eval_fp(odd_[b], t, p_), p_);
  return addp(mulp(half_, powp(t, (p_ - 1) / 2, p_), p_), mulp(z, g, p_), p_);
}

u64 DigitCircuit::eval_univar(u64 z) const { return eval_fp(univar_, z % p_, p_); }


// ---- Encrypted evaluation helpers

namespace {

// ct + c, where ct may be absent.
struct Val {
  std::optional<Ciphertext> ct;
  u64 c = 0;
};

Val add_val(Val a, const Val& b, u64 p, Evaluator& ev, Phase ph) {
  a.c = addp(a.c, b.c, p);
  if (!b.ct) return a;
  a.ct = a.ct ? ev.add(*a.ct, *b.ct, ph) : *b.ct;
  return a;
}

Val scale_val(const Val& v, u64 s, u64 p, Evaluator& ev, Phase ph) {
  Val out{std::nullopt, mulp(v.c, s, p)};
  if (v.ct && s % p != 0) out.ct = s % p == 1 ? *v.ct : ev.mul_scalar(*v.ct, static_cast<std::int64_t>(s % p), ph);
  return out;
}

// x * v: non-scalar only when v carries a ciphertext.
Val mul_val(const Ciphertext& x, const Val& v, Evaluator& ev, Phase ph) {
  Val out;
  if (v.ct) out.ct = ev.mul(x, *v.ct, ph);
  if (v.c != 0) {
    Ciphertext t = v.c == 1 ? x : ev.mul_scalar(x, static_cast<std::int64_t>(v.c), ph);
    out.ct = out.ct ? ev.add(*out.ct, t, ph) : t;
  }
  return out;
}

// Encryption of v, using like only for its shape when v is a bare constant.
Ciphertext materialize(const Val& v, const Ciphertext& like, Evaluator& ev, Phase ph) {
  if (v.ct) return v.c == 0 ? *v.ct : ev.add_scalar(*v.ct, static_cast<std::int64_t>(v.c), ph);
  return ev.add_scalar(ev.mul_scalar(like, 0, ph), static_cast<std::int64_t>(v.c), ph);
}

// sum_a coeffs[a] * powers(a), coeffs[0] as the constant.
template <class Powers>
Val linear(std::span<const u64> coeffs, Powers&& powers, u64 p, Evaluator& ev, Phase ph) {
  Val out{std::nullopt, coeffs.empty() ? 0 : coeffs[0] % p};
  for (std::size_t a = 1; a < coeffs.size(); ++a) {
    if (coeffs[a] % p == 0) continue;
    out = add_val(std::move(out), scale_val(Val{powers(a), 0}, coeffs[a], p, ev, ph), p, ev, ph);
  }
  return out;
}

// Powers of one ciphertext; each new power costs one product of two cached powers.
class PowerCache {
 public:
  PowerCache(const Ciphertext& x, Evaluator& ev, Phase ph) : ev_(ev), ph_(ph) { powers_.emplace(1, x); }

  const Ciphertext& get(std::size_t e) {
    if (auto it = powers_.find(e); it != powers_.end()) return it->second;
    for (std::size_t a = e / 2; a >= 1; --a)
      if (powers_.count(a) != 0 && powers_.count(e - a) != 0)
        return powers_.emplace(e, ev_.mul(powers_.at(a), powers_.at(e - a), ph_)).first->second;
    const std::size_t lo = e / 2;
    get(e - lo);
    get(lo);
    return powers_.emplace(e, ev_.mul(powers_.at(e - lo), powers_.at(lo), ph_)).first->second;
  }

 private:
  Evaluator& ev_;
  Phase ph_;
  std::map<std::size_t, Ciphertext> powers_;
};

std::size_t degree_of(std::span<const u64> coeffs, u64 p) {
  std::size_t d = coeffs.size();
  while (d > 0 && coeffs[d - 1] % p == 0) --d;
  return d == 0 ? 0 : d - 1;
}

Ciphertext ps_eval(std::span<const u64> coeffs, const Ciphertext& x, PowerCache& pc, Evaluator& ev, Phase ph) {
  const u64 p = ev.ctx()->p();
  const std::size_t deg = degree_of(coeffs, p);
  const auto pw = [&](std::size_t a) { return pc.get(a); };
  const std::size_t k = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(deg + 1)))));
  const std::size_t nb = (deg + k) / k;
  if (nb == 1) return materialize(linear(coeffs.first(deg + 1), pw, p, ev, ph), x, ev, ph);

  std::vector<Val> blocks(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    const std::size_t lo = j * k, hi = std::min(deg + 1, lo + k);
    blocks[j] = linear(coeffs.subspan(lo, hi - lo), pw, p, ev, ph);
  }
  // sum_{j in [lo, hi)} B_j G^(j - lo), G = x^k, split at the largest power of two below hi - lo.
  const auto eval = [&](auto&& self, std::size_t lo, std::size_t hi) -> Val {
    if (hi - lo == 1) return blocks[lo];
    const std::size_t m = std::bit_floor(hi - lo - 1);
    Val low = self(self, lo, lo + m);
    Val high = self(self, lo + m, hi);
    if (!high.ct && high.c == 0) return low;
    return add_val(std::move(low), mul_val(pc.get(k * m), high, ev, ph), p, ev, ph);
  };
  return materialize(eval(eval, 0, nb), x, ev, ph);
}

Ciphertext one_minus(const Ciphertext& a, Evaluator& ev, Phase ph) {
  return ev.add_scalar(ev.negate(a, ph), 1, ph);
}

DigitResult bivariate_job(const Ciphertext& x, const Ciphertext& y, const DigitCircuit& c, Evaluator& ev) {
  const u64 p = c.p();
  const std::size_t h = (p - 1) / 2;
  const Ciphertext z = ev.sub(x, y, Phase::extraction);
  const Ciphertext s = ev.add(x, y, Phase::extraction);
  std::vector<Ciphertext> t(h + 1);
  t[1] = ev.square(z, Phase::lt_eq);
  for (std::size_t a = 2; a <= h; ++a) t[a] = ev.mul(t[(a + 1) / 2], t[a / 2], Phase::lt_eq);
  // odd[b][a] multiplies T^a; linear() indexes powers from 1, so shift by one.
  const auto tp = [&](std::size_t a) { return t[a]; };
  const auto& odd = c.odd_part();
  std::size_t top = odd.size();
  while (top > 0 && std::all_of(odd[top - 1].begin(), odd[top - 1].end(), [](u64 v) { return v == 0; })) --top;
  Val acc;
  for (std::size_t b = top; b-- > 0;) {
    Val pb = linear(odd[b], tp, p, ev, Phase::lt_eq);
    acc = b + 1 == top ? std::move(pb) : add_val(mul_val(s, acc, ev, Phase::lt_eq), pb, p, ev, Phase::lt_eq);
  }
  Val lt = mul_val(z, acc, ev, Phase::lt_eq);
  lt = add_val(std::move(lt), scale_val(Val{t[h], 0}, c.half(), p, ev, Phase::lt_eq), p, ev, Phase::lt_eq);
  return {materialize(lt, x, ev, Phase::lt_eq), one_minus(t[h], ev, Phase::lt_eq)};
}

DigitResult univariate_job(const Ciphertext& x, const Ciphertext& y, const DigitCircuit& c, Evaluator& ev,
                           bool want_eq) {
  const Ciphertext z = ev.sub(x, y, Phase::extraction);
  PowerCache pc(z, ev, Phase::lt_eq);
  DigitResult r;
  r.lt = ps_eval(c.lt_univar_coeffs(), z, pc, ev, Phase::lt_eq);
  if (want_eq) r.eq = one_minus(pc.get(c.p() - 1), ev, Phase::lt_eq);
  return r;
}

DigitResult digit_job(const Ciphertext& x, const Ciphertext& y, const DigitCircuit& c, Evaluator& ev,
                      bool want_eq) {
  if (c.p() != ev.ctx()->p()) raise(Errc::config, "circuit and context use different p");
  Evaluator job = ev.fork();
  DigitResult r = c.kind() == CircuitKind::bivariate ? bivariate_job(x, y, c, job)
                                                      : univariate_job(x, y, c, job, want_eq);
  if (job.counter() != nullptr) job.counter()->record_digit_job(c.kind(), job.tally());
  return r;
}

}  // namespace

Ciphertext eq_digit(const Ciphertext& x, const Ciphertext& y, Evaluator& ev) {
  const Ciphertext z = ev.sub(x, y, Phase::extraction);
  PowerCache pc(z, ev, Phase::lt_eq);
  return one_minus(pc.get(ev.ctx()->p() - 1), ev, Phase::lt_eq);
}

Ciphertext lt_digit(const Ciphertext& x, const Ciphertext& y, const DigitCircuit& circuit, Evaluator& ev) {
  return digit_job(x, y, circuit, ev, false).lt;
}

DigitResult lt_eq_digit(const Ciphertext& x, const Ciphertext& y, const DigitCircuit& circuit, Evaluator& ev) {
  return digit_job(x, y, circuit, ev, true);
}

Ciphertext poly_eval_ps(std::span<const u64> coeffs, const Ciphertext& x, Evaluator& ev, Phase ph) {
  PowerCache pc(x, ev, ph);
  return ps_eval(coeffs, x, pc, ev, ph);
}

Ciphertext poly_eval_horner(std::span<const u64> coeffs, const Ciphertext& x, Evaluator& ev, Phase ph) {
  const u64 p = ev.ctx()->p();
  const std::size_t deg = degree_of(coeffs, p);
  Val acc{std::nullopt, coeffs.empty() ? 0 : coeffs[deg] % p};
  for (std::size_t i = deg; i-- > 0;)
    acc = add_val(mul_val(x, acc, ev, ph), Val{std::nullopt, coeffs[i] % p}, p, ev, ph);
  return materialize(acc, x, ev, ph);
}

std::uint64_t ps_mult_bound(std::size_t deg) noexcept {
  if (deg <= 1) return 0;
  const auto root = static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(deg + 1))));
  return 2 * root + static_cast<std::uint64_t>(std::bit_width(deg - 1));
}

// ---- Layout

u64 Layout::max_value() const {
  const u64 radix = plain::digit_radix(p, alphabet);
  u64 v = 0;
  for (std::size_t i = 0; i < digits; ++i) v = v * radix + (radix - 1);
  return v;
}

Layout make_layout(u64 p, std::size_t l, unsigned bits, plain::Alphabet alphabet) {
  Layout out;
  out.p = p;
  out.alphabet = alphabet;
  out.bits = bits;
  out.digits = plain::digits_for_bits(bits, p, alphabet);
  out.width = out.digits;
  out.l = l;
  if (out.width == 0 || out.width > l)
    raise(Errc::capacity_exceeded, std::to_string(bits) + "-bit integers need " + std::to_string(out.digits) +
                                       " digits but only " + std::to_string(l) + " slots exist");
  out.blocks = l / out.width;
  return out;
}

std::vector<u64> pack_ints(std::span<const u64> values, const Layout& layout, u64 fill) {
  if (values.size() > layout.blocks)
    raise(Errc::capacity_exceeded, std::to_string(values.size()) + " integers exceed " +
                                       std::to_string(layout.blocks) + " blocks");
  std::vector<u64> slots(layout.l, 0);
  for (std::size_t j = 0; j < layout.blocks; ++j) {
    const u64 v = j < values.size() ? values[j] : fill;
    const auto d = plain::int_to_digits(v, layout.p, layout.digits, layout.alphabet);
    std::copy(d.digits.begin(), d.digits.end(), slots.begin() + static_cast<std::ptrdiff_t>(j * layout.width));
  }
  return slots;
}

std::vector<u64> unpack_ints(std::span<const u64> slots, const Layout& layout, std::size_t count) {
  std::vector<u64> out;
  for (std::size_t j = 0; j < count; ++j) {
    plain::DigitVec d{{slots.begin() + static_cast<std::ptrdiff_t>(j * layout.width),
                       slots.begin() + static_cast<std::ptrdiff_t>(j * layout.width + layout.digits)},
                      layout.alphabet};
    out.push_back(plain::digits_to_int(d, layout.p));
  }
  return out;
}

std::vector<u64> head_values(std::span<const u64> slots, const Layout& layout, std::size_t count) {
  std::vector<u64> out;
  for (std::size_t j = 0; j < count; ++j) out.push_back(slots[j * layout.width]);
  return out;
}

// ---- BlockMasks

namespace {
enum MaskKind { kForward, kForwardFill, kBackward, kHeads, kBlocks, kFill };
}

BlockMasks::BlockMasks(bgv::ContextPtr ctx, const Layout& layout) : ctx_(std::move(ctx)), layout_(layout) {}

const Plaintext& BlockMasks::cached(int kind, std::size_t a, std::size_t b, u64 v) const {
  std::lock_guard lock(mu_);
  const std::array<u64, 4> key{static_cast<u64>(kind), a, b, v};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const std::size_t W = layout_.width, used = layout_.blocks * W;
  std::vector<u64> slots(layout_.l, 0);
  for (std::size_t s = 0; s < layout_.l; ++s) {
    const bool in_block = s < used;
    const std::size_t blk = s / W, off = s % W;
    bool on = false;
    switch (kind) {
      case kForward: on = in_block && off + a < W; break;
      case kForwardFill: on = !(in_block && off + a < W); break;
      case kBackward: on = in_block && off >= a; break;
      case kHeads: on = in_block && off == 0 && blk >= a && blk < b; break;
      case kBlocks: on = in_block && blk >= a && blk < b; break;
      default: break;
    }
    slots[s] = on ? 1 : 0;
  }
  if (kind == kFill) {
    const auto d = plain::int_to_digits(v, layout_.p, layout_.digits, layout_.alphabet);
    for (std::size_t blk = a; blk < b && blk < layout_.blocks; ++blk)
      std::copy(d.digits.begin(), d.digits.end(), slots.begin() + static_cast<std::ptrdiff_t>(blk * W));
  }
  return cache_.emplace(key, bgv::encode(ctx_, slots, slots::SlotUsage::full(layout_.l))).first->second;
}

const Plaintext& BlockMasks::forward(std::size_t d) const { return cached(kForward, d, 0, 0); }
const Plaintext& BlockMasks::forward_fill(std::size_t d) const { return cached(kForwardFill, d, 0, 0); }
const Plaintext& BlockMasks::backward(std::size_t d) const { return cached(kBackward, d, 0, 0); }
const Plaintext& BlockMasks::heads(std::size_t lo, std::size_t hi) const { return cached(kHeads, lo, hi, 0); }
const Plaintext& BlockMasks::blocks(std::size_t lo, std::size_t hi) const { return cached(kBlocks, lo, hi, 0); }
const Plaintext& BlockMasks::fill(std::size_t lo, std::size_t hi, u64 v) const { return cached(kFill, lo, hi, v); }

CompareSetup CompareSetup::make(const bgv::ContextPtr& ctx, CircuitKind kind, unsigned bits) {
  CompareSetup s;
  s.ctx = ctx;
  s.circuit = DigitCircuit::build(ctx->p(), kind);
  s.layout = make_layout(ctx->p(), ctx->l(), bits, s.circuit.alphabet());
  s.masks = std::make_shared<BlockMasks>(ctx, s.layout);
  return s;
}

// ---- Lexicographic combination

namespace {

// Block-local shift by d with EQ = 1 in the vacated slots.
Ciphertext shifted_eq(const Ciphertext& a, std::size_t d, const BlockMasks& masks, Evaluator& ev) {
  Ciphertext r = ev.mul_plain(ev.rotate(a, static_cast<std::int64_t>(d), Phase::shift_mul), masks.forward(d),
                              Phase::shift_mul);
  return ev.add_plain(r, masks.forward_fill(d), Phase::shift_mul);
}

// Suffix products: slot i of a block ends up with prod_{j >= i} EQ_j.
Ciphertext suffix_products(const Ciphertext& eq_digits, const BlockMasks& masks, Evaluator& ev) {
  Ciphertext q = eq_digits;
  for (std::size_t d = 1; d < masks.layout().digits; d <<= 1)
    q = ev.mul(q, shifted_eq(q, d, masks, ev), Phase::shift_mul);
  return q;
}

}  // namespace

CompareResult lex_combine(const Ciphertext& lt_digits, const Ciphertext& eq_digits, const BlockMasks& masks,
                          Evaluator& ev) {
  const std::size_t k = masks.layout().digits;
  if (k == 1) return {lt_digits, eq_digits};
  Ciphertext q = suffix_products(eq_digits, masks, ev);
  Ciphertext x = ev.mul(lt_digits, shifted_eq(q, 1, masks, ev), Phase::shift_mul);
  for (std::size_t d = 1; d < k; d <<= 1) {
    Ciphertext r = ev.mul_plain(ev.rotate(x, static_cast<std::int64_t>(d), Phase::shift_add), masks.forward(d),
                                Phase::shift_add);
    x = ev.add(x, r, Phase::shift_add);
  }
  return {std::move(x), std::move(q)};
}

CompareResult compare_ints(const Ciphertext& a, const Ciphertext& b, const CompareSetup& setup, Evaluator& ev) {
  DigitResult d = lt_eq_digit(a, b, setup.circuit, ev);
  return lex_combine(d.lt, d.eq, *setup.masks, ev);
}

Ciphertext eq_ints(const Ciphertext& a, const Ciphertext& b, const CompareSetup& setup, Evaluator& ev) {
  return suffix_products(eq_digit(a, b, ev), *setup.masks, ev);
}

std::vector<CompareResult> compare_ints(const std::vector<Ciphertext>& a, const std::vector<Ciphertext>& b,
                                        const CompareSetup& setup, Evaluator& ev, exec::Executor& ex) {
  if (a.size() != b.size()) raise(Errc::length_mismatch, "operand lists differ in length");
  std::vector<std::optional<DigitResult>> digits(a.size());
  ex.run(a.size(), [&](std::size_t i) {
    Evaluator job = ev.fork();
    digits[i].emplace(lt_eq_digit(a[i], b[i], setup.circuit, job));
  });
  std::vector<std::optional<CompareResult>> out(a.size());
  ex.run(a.size(), [&](std::size_t i) {
    Evaluator job = ev.fork();
    out[i].emplace(lex_combine(digits[i]->lt, digits[i]->eq, *setup.masks, job));
  });
  std::vector<CompareResult> res;
  res.reserve(out.size());
  for (auto& r : out) res.push_back(std::move(*r));
  return res;
}

// ---- Selection, minimum, sorting

Ciphertext broadcast_heads(const Ciphertext& ct, std::size_t count, const CompareSetup& setup, Evaluator& ev) {
  const auto& masks = *setup.masks;
  Ciphertext x = ev.mul_plain(ct, masks.heads(0, count), Phase::other);
  for (std::size_t d = 1; d < setup.layout.width; d <<= 1) {
    Ciphertext r = ev.mul_plain(ev.rotate(x, -static_cast<std::int64_t>(d), Phase::other), masks.backward(d),
                                Phase::other);
    x = ev.add(x, r, Phase::other);
  }
  return x;
}

Ciphertext select(const Ciphertext& a, const Ciphertext& b, const Ciphertext& sel, Evaluator& ev) {
  return ev.add(b, ev.mul(ev.sub(a, b, Phase::other), sel, Phase::other), Phase::other);
}

namespace {

Ciphertext min_pair(const Ciphertext& a, const Ciphertext& b, std::size_t count, const CompareSetup& setup,
                    Evaluator& ev) {
  const CompareResult r = compare_ints(a, b, setup, ev);
  return select(a, b, broadcast_heads(r.lt, count, setup, ev), ev);
}

}  // namespace

Ciphertext min_tournament(std::vector<Ciphertext> items, const CompareSetup& setup, Evaluator& ev,
                          exec::Executor& ex) {
  if (items.empty()) raise(Errc::config, "min of an empty list");
  const auto& L = setup.layout;
  const u64 sentinel = L.max_value();
  while (items.size() > 1) {
    if (items.size() % 2 != 0)
      items.push_back(bgv::trivial(setup.masks->fill(0, L.blocks, sentinel), setup.ctx, items.back().level()));
    std::vector<std::optional<Ciphertext>> next(items.size() / 2);
    ex.run(next.size(), [&](std::size_t i) {
      Evaluator job = ev.fork();
      next[i].emplace(min_pair(items[2 * i], items[2 * i + 1], L.blocks, setup, job));
    });
    items.clear();
    for (auto& n : next) items.push_back(std::move(*n));
  }
  Ciphertext ct = std::move(items[0]);
  for (std::size_t count = L.blocks; count > 1;) {
    const std::size_t h = (count + 1) / 2;
    // Block j < count - h receives block j + h; an odd leftover block gets the sentinel.
    Ciphertext moved = ev.rotate(ct, static_cast<std::int64_t>(h * L.width), Phase::other);
    moved = ev.mul_plain(moved, setup.masks->blocks(0, count - h), Phase::other);
    if (count - h < h) moved = ev.add_plain(moved, setup.masks->fill(count - h, h, sentinel), Phase::other);
    ct = min_pair(ct, moved, h, setup, ev);
    count = h;
  }
  return ct;
}

Ciphertext sort_rank(const Ciphertext& v, std::size_t n, const CompareSetup& setup, Evaluator& ev,
                     exec::Executor& ex) {
  const auto& L = setup.layout;
  const u64 p = setup.ctx->p();
  if (n == 0) raise(Errc::config, "sort of an empty list");
  if (2 * n > L.blocks)
    raise(Errc::capacity_exceeded, "sorting " + std::to_string(n) + " integers needs " + std::to_string(2 * n) +
                                       " blocks, have " + std::to_string(L.blocks));
  if (n >= p) raise(Errc::capacity_exceeded, "ranks up to n-1 must be below p");
  if (n == 1) return v;
  const auto W = static_cast<std::int64_t>(L.width);
  const auto N = static_cast<std::int64_t>(n);
  const Ciphertext dup = ev.add(v, ev.rotate(v, -N * W, Phase::other), Phase::other);

  // Offset r compares a_i with a_{(i+r) mod n} in block i.
  std::vector<std::optional<CompareResult>> cmp(n - 1);
  ex.run(n - 1, [&](std::size_t i) {
    Evaluator job = ev.fork();
    const auto r = static_cast<std::int64_t>(i + 1);
    cmp[i].emplace(compare_ints(v, job.rotate(dup, r * W, Phase::other), setup, job));
  });
  // rank_i = sum_j [a_j < a_i] + sum_{j < i} [a_j = a_i], with [a_j < a_i] = 1 - LT(a_i, a_j) - EQ(a_i, a_j).
  std::optional<Ciphertext> acc;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t r = i + 1;
    Ciphertext term = ev.add(cmp[i]->lt, cmp[i]->eq, Phase::other);
    term = ev.sub(ev.mul_plain(cmp[i]->eq, setup.masks->heads(n - r, n), Phase::other), term, Phase::other);
    acc = acc ? ev.add(*acc, term, Phase::other) : term;
  }
  const Ciphertext rank = ev.add_scalar(*acc, static_cast<std::int64_t>(n - 1), Phase::other);

  // output_k = sum_i a_i [rank_i = k], gathered into block 0 and moved to block k.
  std::vector<std::optional<Ciphertext>> placed(n);
  ex.run(n, [&](std::size_t k) {
    Evaluator job = ev.fork();
    const Ciphertext z = job.add_scalar(rank, -static_cast<std::int64_t>(k), Phase::other);
    PowerCache pc(z, job, Phase::other);
    const Ciphertext e = one_minus(pc.get(p - 1), job, Phase::other);
    Ciphertext x = job.mul(broadcast_heads(e, n, setup, job), v, Phase::other);
    for (std::size_t d = 1; d < n; d <<= 1)
      x = job.add(x, job.rotate(x, static_cast<std::int64_t>(d) * W, Phase::other), Phase::other);
    x = job.mul_plain(x, setup.masks->blocks(0, 1), Phase::other);
    placed[k].emplace(job.rotate(x, -static_cast<std::int64_t>(k) * W, Phase::other));
  });
  Ciphertext out = std::move(*placed[0]);
  for (std::size_t k = 1; k < n; ++k) out = ev.add(out, *placed[k], Phase::other);
  return out;
}

}  // namespace ufhe::cmp
