#include "ufhe/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ufhe/error.hpp"

namespace ufhe::io {

namespace {

constexpr char kMagic[5] = {'U', 'F', 'H', 'E', '1'};

class Writer {
 public:
  void bytes(const void* p, std::size_t len) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + len);
  }
  template <class T>
  void put(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  void header(Kind kind, const bgv::ContextPtr& ctx) {
    bytes(kMagic, sizeof kMagic);
    put(static_cast<std::uint8_t>(kind));
    put<std::uint64_t>(ctx->m());
    put<std::uint64_t>(ctx->p());
    put<std::uint32_t>(static_cast<std::uint32_t>(ctx->max_primes()));
  }
  void poly(const ring::RnsPoly& a) {
    put<std::uint8_t>(a.rep() == ring::Rep::eval ? 1 : 0);
    put<std::uint32_t>(static_cast<std::uint32_t>(a.active()));
    put<std::uint32_t>(static_cast<std::uint32_t>(a.width()));
    for (std::size_t i = 0; i < a.active(); ++i)
      for (const u64 v : a.row(i)) put(v);
  }
  void ksw(const bgv::KswKey& key) {
    put<std::uint64_t>(key.galois_exponent);
    put<std::uint32_t>(static_cast<std::uint32_t>(key.b.size()));
    for (std::size_t i = 0; i < key.b.size(); ++i) {
      poly(key.b[i]);
      poly(key.a[i]);
    }
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& buf) : buf_(buf) {}

  template <class T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(buf_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }
  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }

  void header(Kind kind, const bgv::ContextPtr& ctx) {
    need(sizeof kMagic);
    if (std::memcmp(buf_.data() + pos_, kMagic, sizeof kMagic) != 0) raise(Errc::bad_format, "bad magic");
    pos_ += sizeof kMagic;
    if (get<std::uint8_t>() != static_cast<std::uint8_t>(kind)) raise(Errc::bad_format, "unexpected object kind");
    const auto m = get<std::uint64_t>();
    const auto p = get<std::uint64_t>();
    const auto primes = get<std::uint32_t>();
    if (m != ctx->m() || p != ctx->p() || primes != ctx->max_primes())
      raise(Errc::bad_format, "object was written for different parameters");
  }
  ring::RnsPoly poly(const bgv::ContextPtr& ctx) {
    const auto rep = get<std::uint8_t>() == 1 ? ring::Rep::eval : ring::Rep::coeff;
    const auto active = get<std::uint32_t>();
    const auto width = get<std::uint32_t>();
    if (active == 0 || active > ctx->max_primes() || width != ctx->n()) raise(Errc::bad_format, "bad polynomial shape");
    ring::RnsPoly a(ctx->ring(), active, rep);
    for (std::size_t i = 0; i < active; ++i) {
      const u64 q = a.prime(i).value();
      for (auto& v : a.row_mut(i)) {
        v = get<std::uint64_t>();
        if (v >= q) raise(Errc::bad_format, "residue out of range");
      }
    }
    return a;
  }
  bgv::KswKey ksw(const bgv::ContextPtr& ctx) {
    bgv::KswKey key;
    key.galois_exponent = get<std::uint64_t>();
    const auto count = get<std::uint32_t>();
    if (count != ctx->max_primes() * ctx->ks_digits()) raise(Errc::bad_format, "bad key component count");
    for (std::size_t i = 0; i < count; ++i) {
      key.b.push_back(poly(ctx));
      key.a.push_back(poly(ctx));
    }
    return key;
  }
  void finish() const {
    if (pos_ != buf_.size()) raise(Errc::bad_format, "trailing bytes");
  }

 private:
  void need(std::size_t len) const {
    if (buf_.size() - pos_ < len) raise(Errc::bad_format, "truncated buffer");
  }
  const std::vector<std::uint8_t>& buf_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> save(const bgv::Ciphertext& ct, const bgv::ContextPtr& ctx) {
  Writer w;
  w.header(Kind::ciphertext, ctx);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ct.parts.size()));
  for (const auto& part : ct.parts) w.poly(part);
  w.f64(ct.log2_noise);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(ct.usage.provenance));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ct.usage.mask.size()));
  w.bytes(ct.usage.mask.data(), ct.usage.mask.size());
  return w.take();
}

std::vector<std::uint8_t> save(const bgv::SecretKey& sk, const bgv::ContextPtr& ctx) {
  Writer w;
  w.header(Kind::secret_key, ctx);
  w.poly(sk.s);
  return w.take();
}

std::vector<std::uint8_t> save(const bgv::PublicKey& pk, const bgv::ContextPtr& ctx) {
  Writer w;
  w.header(Kind::public_key, ctx);
  w.poly(pk.b);
  w.poly(pk.a);
  return w.take();
}

std::vector<std::uint8_t> save(const bgv::KswKey& key, const bgv::ContextPtr& ctx) {
  Writer w;
  w.header(Kind::ksw_key, ctx);
  w.ksw(key);
  return w.take();
}

std::vector<std::uint8_t> save(const bgv::GaloisKeys& keys, const bgv::ContextPtr& ctx) {
  Writer w;
  w.header(Kind::galois_keys, ctx);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(keys.keys.size()));
  for (const auto& [t, key] : keys.keys) w.ksw(key);
  return w.take();
}

bgv::Ciphertext load_ciphertext(const std::vector<std::uint8_t>& buf, const bgv::ContextPtr& ctx) {
  Reader r(buf);
  r.header(Kind::ciphertext, ctx);
  bgv::Ciphertext ct;
  const auto parts = r.get<std::uint32_t>();
  if (parts < 2 || parts > 3) raise(Errc::bad_format, "ciphertext must have 2 or 3 parts");
  for (std::size_t k = 0; k < parts; ++k) ct.parts.push_back(r.poly(ctx));
  for (const auto& part : ct.parts)
    if (part.active() != ct.parts[0].active() || part.rep() != ring::Rep::eval)
      raise(Errc::bad_format, "ciphertext parts disagree");
  ct.log2_noise = r.f64();
  ct.usage.provenance = static_cast<slots::OpTag>(r.get<std::uint8_t>());
  const auto len = r.get<std::uint32_t>();
  if (len != 0 && len != ctx->l()) raise(Errc::bad_format, "usage mask length");
  ct.usage.mask.resize(len);
  for (auto& b : ct.usage.mask) b = r.get<std::uint8_t>() != 0 ? 1 : 0;
  r.finish();
  return ct;
}

bgv::SecretKey load_secret_key(const std::vector<std::uint8_t>& buf, const bgv::ContextPtr& ctx) {
  Reader r(buf);
  r.header(Kind::secret_key, ctx);
  bgv::SecretKey sk{r.poly(ctx)};
  r.finish();
  return sk;
}

bgv::PublicKey load_public_key(const std::vector<std::uint8_t>& buf, const bgv::ContextPtr& ctx) {
  Reader r(buf);
  r.header(Kind::public_key, ctx);
  bgv::PublicKey pk;
  pk.b = r.poly(ctx);
  pk.a = r.poly(ctx);
  r.finish();
  return pk;
}

bgv::KswKey load_ksw_key(const std::vector<std::uint8_t>& buf, const bgv::ContextPtr& ctx) {
  Reader r(buf);
  r.header(Kind::ksw_key, ctx);
  auto key = r.ksw(ctx);
  r.finish();
  return key;
}

bgv::GaloisKeys load_galois_keys(const std::vector<std::uint8_t>& buf, const bgv::ContextPtr& ctx) {
  Reader r(buf);
  r.header(Kind::galois_keys, ctx);
  bgv::GaloisKeys keys;
  const auto count = r.get<std::uint32_t>();
  for (std::size_t i = 0; i < count; ++i) {
    auto key = r.ksw(ctx);
    const u64 t = key.galois_exponent;
    keys.keys.emplace(t, std::move(key));
  }
  r.finish();
  return keys;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& buf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::config, "cannot open " + path);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::config, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace ufhe::io
