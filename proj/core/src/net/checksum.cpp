#include "advpad/net/checksum.hpp"

namespace advpad::net {

void ChecksumAccumulator::add(ByteView data) noexcept {
  std::size_t i = 0;
  if (odd_ && !data.empty()) {
    sum_ += (static_cast<std::uint32_t>(pending_) << 8) | data[0];
    odd_ = false;
    i = 1;
  }
  for (; i + 1 < data.size(); i += 2) {
    sum_ += (static_cast<std::uint32_t>(data[i]) << 8) | data[i + 1];
  }
  if (i < data.size()) {
    pending_ = data[i];
    odd_ = true;
  }
}

void ChecksumAccumulator::add_u16(std::uint16_t word) noexcept {
  const std::uint8_t bytes[2] = {static_cast<std::uint8_t>(word >> 8),
                                 static_cast<std::uint8_t>(word)};
  add(bytes);
}

void ChecksumAccumulator::add_u32(std::uint32_t value) noexcept {
  add_u16(static_cast<std::uint16_t>(value >> 16));
  add_u16(static_cast<std::uint16_t>(value));
}

std::uint16_t ChecksumAccumulator::folded_sum() const noexcept {
  std::uint64_t sum = sum_;
  if (odd_) sum += static_cast<std::uint32_t>(pending_) << 8;
  while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
  return static_cast<std::uint16_t>(sum);
}

std::uint16_t ones_complement_checksum(ByteView data) noexcept {
  ChecksumAccumulator acc;
  acc.add(data);
  return acc.checksum();
}

}  // namespace advpad::net
