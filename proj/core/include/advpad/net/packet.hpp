#pragma once

#include <array>
#include <cstdint>
#include <variant>

#include "advpad/bytes.hpp"

namespace advpad::net {

enum class Protocol : std::uint8_t { Tcp = 6, Udp = 17 };

inline constexpr std::size_t kIpv4MinHeader = 20;
inline constexpr std::size_t kTcpMinHeader = 20;
inline constexpr std::size_t kUdpHeader = 8;
inline constexpr std::size_t kMaxTotalLength = 65535;

struct Ipv4Header {
  std::uint8_t version = 4;
  std::uint8_t ihl = 5;  // in 32-bit words
  std::uint8_t tos = 0;
  std::uint16_t total_length = 0;
  std::uint16_t identification = 0;
  std::uint16_t flags_fragment = 0;
  std::uint8_t ttl = 64;
  std::uint8_t protocol = 0;
  std::uint16_t header_checksum = 0;
  std::uint32_t src_addr = 0;
  std::uint32_t dst_addr = 0;
  Bytes options;  // carried opaquely, ihl*4 - 20 bytes

  std::size_t header_length() const noexcept { return kIpv4MinHeader + options.size(); }
  bool operator==(const Ipv4Header&) const = default;
};

struct TcpHeader {
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint32_t seq_num = 0;
  std::uint32_t ack_num = 0;
  std::uint8_t data_offset = 5;  // in 32-bit words
  std::uint8_t reserved = 0;     // low nibble of byte 12 (reserved bits + NS)
  std::uint8_t flags = 0;
  std::uint16_t window = 0;
  std::uint16_t checksum = 0;
  std::uint16_t urgent_ptr = 0;
  Bytes options;  // carried opaquely, data_offset*4 - 20 bytes

  std::size_t header_length() const noexcept { return kTcpMinHeader + options.size(); }
  bool operator==(const TcpHeader&) const = default;
};

struct UdpHeader {
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint16_t length = 0;
  std::uint16_t checksum = 0;  // 0 means "checksum disabled"

  bool operator==(const UdpHeader&) const = default;
};

// A decoded IPv4 packet. `link_padding` holds bytes that followed the IP
// datagram in the capture (e.g. Ethernet minimum-frame padding); it is
// reproduced on serialization so parse/serialize round-trips byte-exactly.
struct ParsedPacket {
  Ipv4Header ip;
  std::variant<TcpHeader, UdpHeader> transport;
  Bytes payload;
  Bytes link_padding;

  bool is_tcp() const noexcept { return std::holds_alternative<TcpHeader>(transport); }
  bool is_udp() const noexcept { return std::holds_alternative<UdpHeader>(transport); }
  TcpHeader& tcp() { return std::get<TcpHeader>(transport); }
  const TcpHeader& tcp() const { return std::get<TcpHeader>(transport); }
  UdpHeader& udp() { return std::get<UdpHeader>(transport); }
  const UdpHeader& udp() const { return std::get<UdpHeader>(transport); }

  std::size_t transport_header_length() const noexcept;
  // ip header + transport header + payload, i.e. what total_length should be.
  std::size_t computed_total_length() const noexcept;

  bool operator==(const ParsedPacket&) const = default;
};

ParsedPacket parse_packet(ByteView raw);
Bytes serialize(const ParsedPacket& pkt);

// Transport header with the checksum field as stored.
Bytes serialize_transport_header(const ParsedPacket& pkt);

std::uint16_t ipv4_header_checksum(const ParsedPacket& pkt);
std::uint16_t transport_checksum(const ParsedPacket& pkt);

// Recompute total_length, UDP length, and both checksums. A UDP checksum of
// zero on input stays zero (checksum disabled). Throws PacketTooLarge.
ParsedPacket finalize(ParsedPacket pkt);

// Recompute length fields only (checksums untouched).
void refresh_lengths(ParsedPacket& pkt);

// Lengths consistent and both checksums self-verify.
bool is_consistent(const ParsedPacket& pkt) noexcept;
// Throws MalformedHeader describing the first violated property.
void validate(const ParsedPacket& pkt);

// Sum over the checksummed region with the stored checksum included; 0x0000
// means the stored value verifies.
std::uint16_t verify_ip_checksum(const ParsedPacket& pkt);
std::uint16_t verify_transport_checksum(const ParsedPacket& pkt);

// Classifier input projection: the IP header is dropped, transport ports are
// removed, and the transport checksum is zeroed, followed by the payload.
// For TCP this is 16 header bytes (+ options); for UDP 4 bytes.
Bytes transport_view(const ParsedPacket& pkt);
// Offset of the first payload byte inside transport_view().
std::size_t transport_view_payload_offset(const ParsedPacket& pkt) noexcept;

// Convenience builders used by fixtures and the synthetic generator. The
// result is finalized.
struct Endpoints {
  std::uint32_t src_addr = 0x0A000001;
  std::uint32_t dst_addr = 0x0A000002;
  std::uint16_t src_port = 40000;
  std::uint16_t dst_port = 443;
};
ParsedPacket make_tcp_packet(const Endpoints& ep, std::uint32_t seq, std::uint32_t ack,
                             std::uint16_t window, std::uint16_t urgent, ByteView payload,
                             std::uint8_t flags = 0x18);
ParsedPacket make_udp_packet(const Endpoints& ep, ByteView payload);

}  // namespace advpad::net
