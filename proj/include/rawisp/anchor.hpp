#pragma once

#include <compare>
#include <cstdint>

namespace rawisp {

// A seed hit: event index in the read matched to a base offset in the reference.
// Ordered by reference position, then read position.
struct Anchor {
  std::uint32_t ref_pos = 0;
  std::uint32_t read_pos = 0;

  friend auto operator<=>(const Anchor&, const Anchor&) = default;
};

inline constexpr std::uint64_t kAnchorBytes = 8;

}  // namespace rawisp
