#pragma once

#include <cstdint>

#include "advpad/bytes.hpp"

namespace advpad::net {

// Running one's-complement sum over big-endian 16-bit words (RFC 1071).
// Chunks may have odd lengths; a dangling byte is carried into the next
// chunk so the result equals summing the concatenation.
class ChecksumAccumulator {
 public:
  void add(ByteView data) noexcept;
  void add_u16(std::uint16_t word) noexcept;
  void add_u32(std::uint32_t value) noexcept;

  // Folded 16-bit one's-complement sum (not yet complemented).
  std::uint16_t folded_sum() const noexcept;
  // The Internet checksum: complement of the folded sum.
  std::uint16_t checksum() const noexcept { return static_cast<std::uint16_t>(~folded_sum()); }

 private:
  std::uint64_t sum_ = 0;
  bool odd_ = false;
  std::uint8_t pending_ = 0;
};

// Internet checksum of `data`; odd lengths are zero-padded for summation.
// The value is the 16-bit number to be written big-endian into a header.
std::uint16_t ones_complement_checksum(ByteView data) noexcept;

}  // namespace advpad::net
