#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace ufhe::slots {

enum class OpTag : std::uint8_t { none, encode, add, mul, rotate, compact, declare };

// Which slots carry useful values; propagated conservatively through operations.
struct SlotUsage {
  std::vector<std::uint8_t> mask;
  OpTag provenance = OpTag::none;

  static SlotUsage full(std::size_t l, OpTag tag = OpTag::encode) { return {std::vector<std::uint8_t>(l, 1), tag}; }
  static SlotUsage first(std::size_t l, std::size_t count, OpTag tag = OpTag::encode) {
    SlotUsage u{std::vector<std::uint8_t>(l, 0), tag};
    std::fill(u.mask.begin(), u.mask.begin() + static_cast<std::ptrdiff_t>(std::min(count, l)), 1);
    return u;
  }

  std::size_t size() const noexcept { return mask.size(); }
  std::size_t used() const noexcept { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1)); }
  double utilization() const noexcept { return mask.empty() ? 0.0 : static_cast<double>(used()) / mask.size(); }
  bool operator==(const SlotUsage& o) const noexcept { return mask == o.mask; }
};

}  // namespace ufhe::slots
