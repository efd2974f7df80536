#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "ufhe/bgv.hpp"
#include "ufhe/compare.hpp"
#include "ufhe/rng.hpp"
#include "ufhe/transform.hpp"

namespace ufhe::test {

// Context and keys built once per parameter triple for the whole test binary.
struct Fixture {
  transform::PlanCache cache;
  bgv::ContextPtr ctx;
  bgv::KeySet keys;

  bgv::Ciphertext enc(std::span<const u64> slots, std::uint64_t seed) const {
    return bgv::encrypt(bgv::encode(ctx, slots), keys.pk, ctx, seed);
  }
  std::vector<u64> dec(const bgv::Ciphertext& ct) const { return bgv::decrypt_slots(ct, keys.sk, ctx); }
  cmp::Evaluator evaluator(cmp::OpCounter* counter = nullptr) const {
    return cmp::Evaluator(ctx, keys.relin, keys.galois, counter);
  }
};

inline const Fixture& fixture(u64 p, u64 m, std::size_t levels,
                              bgv::Circuit circuit = bgv::Circuit::bivariate) {
  static std::mutex mu;
  static std::map<std::tuple<u64, u64, std::size_t, int>, std::unique_ptr<Fixture>> cache;
  std::lock_guard lock(mu);
  auto& f = cache[{p, m, levels, static_cast<int>(circuit)}];
  if (!f) {
    f = std::make_unique<Fixture>();
    bgv::ParamsSpec spec;
    spec.p = p;
    spec.m = m;
    spec.levels = levels;
    spec.circuit = circuit;
    f->ctx = bgv::Context::create(spec, f->cache);
    f->keys = bgv::keygen(f->ctx, 0xfeedULL + p * 1000 + m);
  }
  return *f;
}

inline std::vector<u64> random_slots(std::size_t l, u64 bound, Prng& rng) {
  std::vector<u64> v(l);
  for (auto& x : v) x = rng.uniform(bound);
  return v;
}

}  // namespace ufhe::test
