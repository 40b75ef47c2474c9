#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "advpad/bytes.hpp"

namespace advpad::net {

inline constexpr std::uint32_t kPcapMagic = 0xA1B2C3D4;
inline constexpr std::uint32_t kLinktypeEthernet = 1;
inline constexpr std::uint32_t kLinktypeRaw = 101;
inline constexpr std::uint32_t kLinktypeIpv4 = 228;

struct PcapRecord {
  std::uint32_t ts_sec = 0;
  std::uint32_t ts_usec = 0;
  std::uint32_t orig_len = 0;
  Bytes data;

  bool operator==(const PcapRecord&) const = default;
};

// Classic libpcap capture. The global header is retained so a rewritten
// file keeps the original byte order, snaplen and linktype.
struct PcapFile {
  bool big_endian = false;
  std::uint16_t version_major = 2;
  std::uint16_t version_minor = 4;
  std::int32_t thiszone = 0;
  std::uint32_t sigfigs = 0;
  std::uint32_t snaplen = 65535;
  std::uint32_t linktype = kLinktypeRaw;
  std::vector<PcapRecord> records;

  bool operator==(const PcapFile&) const = default;
};

// Throws BadMagic, TruncatedRecord, or Io.
PcapFile read_pcap(const std::filesystem::path& path);
PcapFile parse_pcap(ByteView contents);
void write_pcap(const std::filesystem::path& path, const PcapFile& file);
Bytes encode_pcap(const PcapFile& file);

// A link-layer frame split into the bytes preceding the IP datagram and the
// datagram itself. Non-IPv4 frames (ARP, IPv6, ...) yield std::nullopt.
struct LinkFrame {
  Bytes link_header;
  Bytes ip_bytes;
};
std::optional<LinkFrame> split_link_frame(std::uint32_t linktype, ByteView frame);
Bytes join_link_frame(ByteView link_header, ByteView ip_bytes);

// One packet per line, lowercase hex. Blank lines and lines starting with
// '#' are skipped on read.
std::vector<Bytes> read_hex_lines(const std::filesystem::path& path);
void write_hex_lines(const std::filesystem::path& path, const std::vector<Bytes>& packets);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, ByteView contents);

}  // namespace advpad::net
