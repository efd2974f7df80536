#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ufhe/bgv.hpp"
#include "ufhe/slot_usage.hpp"

namespace ufhe::slots {

// Extra information an operation supplies to usage tracking.
struct TrackMeta {
  // rotate: output slot i reads input slot i + shift.
  std::int64_t shift = 0;
  // encode: number of values written, starting at slot 0.
  std::size_t declared = 0;
  // add/mul: slots the algorithm declares live; empty means all.
  std::vector<std::uint8_t> live;
};

SlotUsage track(OpTag op, std::span<const SlotUsage> inputs, const TrackMeta& meta = {});

// Every stride-th slot starting at offset marked useful.
SlotUsage strided(std::size_t l, std::size_t stride, std::size_t offset = 0);

struct Move {
  std::size_t src_ct = 0;
  std::size_t src_slot = 0;
  std::size_t dst_ct = 0;
  std::size_t dst_slot = 0;

  bool operator==(const Move&) const = default;
};

struct CompactionPlan {
  std::vector<Move> moves;
  std::size_t src_count = 0;
  std::size_t dst_count = 0;
  std::size_t l = 0;

  bool identity() const noexcept;
  // Distinct (src_ct, dst_ct, offset) groups; each costs one mask product and at most one rotation.
  std::size_t bucket_count() const;
  std::vector<SlotUsage> dst_usage() const;
};

// Greedy packing into ceil(useful / l) ciphertexts. Each source ciphertext is placed with as few
// distinct offsets as the greedy choice finds. Returns the identity plan when no ciphertext is saved.
CompactionPlan plan_compaction(std::span<const SlotUsage> usages);

std::vector<bgv::Ciphertext> apply_compaction(const std::vector<bgv::Ciphertext>& cts, const CompactionPlan& plan,
                                              const bgv::ContextPtr& ctx, const bgv::GaloisKeys& keys);

struct CompactionReport {
  bool applied = false;
  std::string reason;
  std::size_t src_count = 0;
  std::size_t dst_count = 0;
  double utilization_before = 0;
  double utilization_after = 0;
};

// Plans and applies compaction when it saves ciphertexts and the noise budget covers one mask product
// and one rotation; otherwise returns the inputs with the reason recorded.
std::vector<bgv::Ciphertext> compact(const std::vector<bgv::Ciphertext>& cts, const bgv::ContextPtr& ctx,
                                     const bgv::GaloisKeys& keys, CompactionReport& report);

}  // namespace ufhe::slots
