#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "advpad/bytes.hpp"
#include "advpad/net/packet.hpp"

namespace advpad::perturb {

enum class Scheme { PrePad, PostPad, FixedPad };

std::string_view scheme_name(Scheme scheme) noexcept;
Scheme parse_scheme(std::string_view name);  // throws Config

enum class Provenance { Random, Policy, Cache };

struct AdversarialByteSequence {
  Bytes bytes;
  Provenance provenance = Provenance::Random;
};

// TCP fields overwritten by pre-padding, in fill order:
// seq (4) | ack (4) | window (2) | urgent pointer (2).
inline constexpr std::size_t kHeaderFieldBytes = 12;
using HeaderFieldBlock = std::array<std::uint8_t, kHeaderFieldBytes>;

// Reversal trailer appended to pre-padded TCP packets:
// original field block (12) | payload_insert_len (1) | 0xAD 0x7E.
inline constexpr std::size_t kTrailerLength = kHeaderFieldBytes + 3;
inline constexpr std::uint8_t kTrailerMagic0 = 0xAD;
inline constexpr std::uint8_t kTrailerMagic1 = 0x7E;
inline constexpr std::size_t kMaxTcpInsert = 0xFF;

struct PerturbationRecord {
  Scheme scheme = Scheme::PrePad;
  std::uint8_t header_bytes_used = 0;
  HeaderFieldBlock original_fields{};
  std::size_t payload_insert_len = 0;

  std::size_t total_budget() const noexcept { return header_bytes_used + payload_insert_len; }
  bool operator==(const PerturbationRecord&) const = default;
};

struct Perturbed {
  net::ParsedPacket packet;
  PerturbationRecord record;
};

HeaderFieldBlock read_header_fields(const net::TcpHeader& tcp) noexcept;
void write_header_fields(net::TcpHeader& tcp, const HeaderFieldBlock& block) noexcept;
// Overwrite byte `index` (0..11) of the field block.
void write_header_field_byte(net::TcpHeader& tcp, std::size_t index, std::uint8_t value);

// Finish a pre-padded packet whose fields and payload have already been
// modified: append the reversal trailer (TCP with a non-empty perturbation)
// and finalize lengths and checksums.
net::ParsedPacket seal_pre_pad(net::ParsedPacket working, const HeaderFieldBlock& original_fields,
                               std::size_t payload_insert_len, bool perturbed);

// Overwrite the TCP field block with the first min(|adv|, 12) bytes and
// insert the rest at payload offset 0. UDP headers are left alone and the
// whole sequence is inserted. An empty sequence yields finalize(pkt).
Perturbed pre_pad(const net::ParsedPacket& pkt, ByteView adv);

// Inverse of every scheme; throws InconsistentRecord when the packet cannot
// have been produced from `record`.
net::ParsedPacket de_perturb(const net::ParsedPacket& pkt, const PerturbationRecord& record);

// TCP-only reversal that reads everything it needs from the trailer.
Perturbed de_perturb_from_trailer(const net::ParsedPacket& pkt);

// Append `adv` after the payload.
net::ParsedPacket post_pad(const net::ParsedPacket& pkt, ByteView adv);
// Append zero bytes until total_length == target_len. Throws AlreadyLonger.
net::ParsedPacket fixed_pad(const net::ParsedPacket& pkt, std::size_t target_len);

PerturbationRecord post_pad_record(std::size_t appended);
PerturbationRecord fixed_pad_record(const net::ParsedPacket& pkt, std::size_t target_len);

// Deterministic uniform bytes from a 64-bit Mersenne Twister seeded with
// `seed`; each engine output supplies eight bytes, low byte first.
AdversarialByteSequence random_sequence(std::size_t len, std::uint64_t seed);

}  // namespace advpad::perturb
