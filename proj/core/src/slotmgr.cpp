#include "ufhe/slotmgr.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "ufhe/error.hpp"

namespace ufhe::slots {

namespace {

std::size_t wrap(std::int64_t v, std::size_t l) {
  const auto L = static_cast<std::int64_t>(l);
  return static_cast<std::size_t>(((v % L) + L) % L);
}

double mean_utilization(std::span<const SlotUsage> us) {
  if (us.empty()) return 0;
  double sum = 0;
  for (const auto& u : us) sum += u.utilization();
  return sum / static_cast<double>(us.size());
}

}  // namespace

SlotUsage track(OpTag op, std::span<const SlotUsage> inputs, const TrackMeta& meta) {
  switch (op) {
    case OpTag::encode: {
      if (inputs.empty()) raise(Errc::length_mismatch, "encode tracking needs the slot count");
      return SlotUsage::first(inputs[0].size(), meta.declared, OpTag::encode);
    }
    case OpTag::rotate: {
      if (inputs.size() != 1) raise(Errc::length_mismatch, "rotate takes one input");
      const auto& in = inputs[0];
      SlotUsage out{std::vector<std::uint8_t>(in.size(), 0), OpTag::rotate};
      for (std::size_t i = 0; i < in.size(); ++i)
        out.mask[i] = in.mask[wrap(static_cast<std::int64_t>(i) + meta.shift, in.size())];
      return out;
    }
    default: break;
  }
  if (inputs.empty()) raise(Errc::length_mismatch, "no inputs to track");
  const std::size_t l = inputs[0].size();
  SlotUsage out{std::vector<std::uint8_t>(l, 0), op};
  for (const auto& in : inputs) {
    if (in.size() != l) raise(Errc::length_mismatch, "usage masks of length " + std::to_string(l) + " and " +
                                                         std::to_string(in.size()));
    for (std::size_t i = 0; i < l; ++i) out.mask[i] |= in.mask[i];
  }
  if (!meta.live.empty()) {
    if (meta.live.size() != l) raise(Errc::length_mismatch, "live mask length");
    for (std::size_t i = 0; i < l; ++i) out.mask[i] &= meta.live[i] != 0 ? 1 : 0;
  }
  return out;
}

SlotUsage strided(std::size_t l, std::size_t stride, std::size_t offset) {
  SlotUsage u{std::vector<std::uint8_t>(l, 0), OpTag::declare};
  if (stride == 0) return u;
  for (std::size_t i = offset; i < l; i += stride) u.mask[i] = 1;
  return u;
}

bool CompactionPlan::identity() const noexcept {
  return dst_count == src_count &&
         std::all_of(moves.begin(), moves.end(),
                     [](const Move& m) { return m.src_ct == m.dst_ct && m.src_slot == m.dst_slot; });
}

std::size_t CompactionPlan::bucket_count() const {
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, int> b;
  for (const auto& m : moves) b[{m.src_ct, m.dst_ct, wrap(static_cast<std::int64_t>(m.src_slot) -
                                                               static_cast<std::int64_t>(m.dst_slot), l)}] = 1;
  return b.size();
}

std::vector<SlotUsage> CompactionPlan::dst_usage() const {
  std::vector<SlotUsage> out(dst_count, SlotUsage{std::vector<std::uint8_t>(l, 0), OpTag::compact});
  for (const auto& m : moves) out[m.dst_ct].mask[m.dst_slot] = 1;
  return out;
}

CompactionPlan plan_compaction(std::span<const SlotUsage> usages) {
  CompactionPlan plan;
  plan.src_count = usages.size();
  if (usages.empty()) return plan;
  plan.l = usages[0].size();
  const std::size_t l = plan.l;
  std::size_t total = 0;
  for (const auto& u : usages) {
    if (u.size() != l) raise(Errc::length_mismatch, "usage masks differ in length");
    total += u.used();
  }
  const std::size_t dst = (total + l - 1) / l;
  if (dst >= usages.size()) {
    plan.dst_count = usages.size();
    for (std::size_t c = 0; c < usages.size(); ++c)
      for (std::size_t s = 0; s < l; ++s)
        if (usages[c].mask[s] != 0) plan.moves.push_back({c, s, c, s});
    return plan;
  }
  plan.dst_count = dst;
  std::vector<std::vector<std::uint8_t>> taken(dst, std::vector<std::uint8_t>(l, 0));
  for (std::size_t c = 0; c < usages.size(); ++c) {
    std::vector<std::size_t> rest;
    for (std::size_t s = 0; s < l; ++s)
      if (usages[c].mask[s] != 0) rest.push_back(s);
    // Repeatedly take the (destination, offset) that lands the most remaining slots on free positions.
    while (!rest.empty()) {
      // Ties go to the earliest destination, then the lowest slots (left-to-right packing).
      std::size_t best_d = 0, best_o = 0, best_n = 0, best_sum = 0;
      for (std::size_t d = 0; d < dst; ++d)
        for (std::size_t o = 0; o < l; ++o) {
          std::size_t n = 0, sum = 0;
          for (const std::size_t s : rest) {
            const std::size_t t = wrap(static_cast<std::int64_t>(s) - static_cast<std::int64_t>(o), l);
            if (taken[d][t] == 0) ++n, sum += t;
          }
          const bool better = n > best_n || (n == best_n && n > 0 && d == best_d && sum < best_sum);
          if (better) best_n = n, best_sum = sum, best_d = d, best_o = o;
        }
      std::vector<std::size_t> left;
      for (const std::size_t s : rest) {
        const std::size_t t = wrap(static_cast<std::int64_t>(s) - static_cast<std::int64_t>(best_o), l);
        if (taken[best_d][t] == 0) {
          taken[best_d][t] = 1;
          plan.moves.push_back({c, s, best_d, t});
        } else {
          left.push_back(s);
        }
      }
      rest = std::move(left);
    }
  }
  return plan;
}

std::vector<bgv::Ciphertext> apply_compaction(const std::vector<bgv::Ciphertext>& cts, const CompactionPlan& plan,
                                              const bgv::ContextPtr& ctx, const bgv::GaloisKeys& keys) {
  if (cts.size() != plan.src_count) raise(Errc::length_mismatch, "plan was built for a different ciphertext count");
  if (plan.identity()) return cts;
  const std::size_t l = ctx->l();
  if (plan.l != l) raise(Errc::length_mismatch, "plan slot count differs from the context");
  std::size_t level = cts.front().level();
  for (const auto& ct : cts) level = std::min(level, ct.level());

  // (dst, src, offset) -> source slots to move.
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::vector<std::size_t>> buckets;
  for (const auto& m : plan.moves)
    buckets[{m.dst_ct, m.src_ct, wrap(static_cast<std::int64_t>(m.src_slot) - static_cast<std::int64_t>(m.dst_slot), l)}]
        .push_back(m.src_slot);

  std::vector<std::optional<bgv::Ciphertext>> out(plan.dst_count);
  for (const auto& [key, src_slots] : buckets) {
    const auto [d, c, offset] = key;
    std::vector<u64> mask(l, 0);
    for (const std::size_t s : src_slots) mask[s] = 1;
    const bgv::Ciphertext& src = cts[c];
    bgv::Ciphertext part = bgv::he_mul_plain(src.level() == level ? src : bgv::mod_switch_to(src, level, ctx),
                                             bgv::encode(ctx, mask, SlotUsage::full(l)), ctx);
    part.usage = SlotUsage{std::vector<std::uint8_t>(mask.begin(), mask.end()), OpTag::compact};
    if (offset != 0) part = bgv::rotate(part, static_cast<std::int64_t>(offset), keys, ctx);
    out[d] = out[d] ? bgv::he_add(*out[d], part, ctx) : part;
  }
  const auto usage = plan.dst_usage();
  std::vector<bgv::Ciphertext> res;
  for (std::size_t d = 0; d < plan.dst_count; ++d) {
    res.push_back(std::move(*out[d]));
    res.back().usage = usage[d];
  }
  return res;
}

std::vector<bgv::Ciphertext> compact(const std::vector<bgv::Ciphertext>& cts, const bgv::ContextPtr& ctx,
                                     const bgv::GaloisKeys& keys, CompactionReport& report) {
  std::vector<SlotUsage> usages;
  for (const auto& ct : cts)
    usages.push_back(ct.usage.mask.empty() ? SlotUsage::full(ctx->l()) : ct.usage);
  report = {};
  report.src_count = cts.size();
  report.utilization_before = mean_utilization(usages);
  const auto skip = [&](std::string why) {
    report.reason = std::move(why);
    report.dst_count = cts.size();
    report.utilization_after = report.utilization_before;
    return cts;
  };
  if (cts.empty()) return skip("no ciphertexts");
  const CompactionPlan plan = plan_compaction(usages);
  if (plan.identity()) return skip("compaction does not reduce the ciphertext count");
  // One mask product and one rotation on top of the worst input.
  std::size_t level = cts.front().level();
  double noise = 0;
  for (const auto& ct : cts) level = std::min(level, ct.level()), noise = std::max(noise, ct.log2_noise);
  const double half_p = std::log2(static_cast<double>(ctx->p() - 1) / 2);
  const double after = std::log2(std::exp2(noise + ctx->log2_mul_expansion() + half_p + ctx->log2_auto_expansion()) +
                                 std::exp2(ctx->log2_ks_noise(level)));
  if (after >= ctx->log2_threshold(level)) return skip("noise budget does not cover the mask product and rotation");
  auto out = apply_compaction(cts, plan, ctx, keys);
  report.applied = true;
  report.dst_count = out.size();
  std::vector<SlotUsage> after_usage;
  for (const auto& ct : out) after_usage.push_back(ct.usage);
  report.utilization_after = mean_utilization(after_usage);
  return out;
}

}  // namespace ufhe::slots
