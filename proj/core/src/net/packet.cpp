#include "advpad/net/packet.hpp"

#include <string>

#include "advpad/error.hpp"
#include "advpad/net/checksum.hpp"

namespace advpad::net {

std::size_t ParsedPacket::transport_header_length() const noexcept {
  return is_tcp() ? tcp().header_length() : kUdpHeader;
}

std::size_t ParsedPacket::computed_total_length() const noexcept {
  return ip.header_length() + transport_header_length() + payload.size();
}

ParsedPacket parse_packet(ByteView raw) {
  if (raw.size() < kIpv4MinHeader) {
    fail(ErrorCode::TruncatedPacket,
         "packet of " + std::to_string(raw.size()) + " bytes is shorter than an IPv4 header");
  }
  ParsedPacket pkt;
  Ipv4Header& ip = pkt.ip;
  ip.version = raw[0] >> 4;
  ip.ihl = raw[0] & 0x0F;
  if (ip.version != 4) {
    fail(ErrorCode::UnsupportedProtocol, "IP version " + std::to_string(ip.version));
  }
  if (ip.ihl < 5) fail(ErrorCode::MalformedHeader, "ihl " + std::to_string(ip.ihl) + " < 5");
  const std::size_t ip_len = std::size_t{ip.ihl} * 4;
  if (raw.size() < ip_len) fail(ErrorCode::TruncatedPacket, "IPv4 options cut short");
  ip.tos = raw[1];
  ip.total_length = load_be16(&raw[2]);
  ip.identification = load_be16(&raw[4]);
  ip.flags_fragment = load_be16(&raw[6]);
  ip.ttl = raw[8];
  ip.protocol = raw[9];
  ip.header_checksum = load_be16(&raw[10]);
  ip.src_addr = load_be32(&raw[12]);
  ip.dst_addr = load_be32(&raw[16]);
  ip.options.assign(raw.begin() + kIpv4MinHeader, raw.begin() + static_cast<long>(ip_len));

  if (ip.total_length < ip_len) {
    fail(ErrorCode::MalformedHeader, "total_length smaller than IP header");
  }
  if (raw.size() < ip.total_length) {
    fail(ErrorCode::TruncatedPacket, "capture of " + std::to_string(raw.size()) +
                                         " bytes declares total_length " +
                                         std::to_string(ip.total_length));
  }
  if (ip.protocol != static_cast<std::uint8_t>(Protocol::Tcp) &&
      ip.protocol != static_cast<std::uint8_t>(Protocol::Udp)) {
    fail(ErrorCode::UnsupportedProtocol, "IP protocol " + std::to_string(ip.protocol));
  }

  const ByteView segment = raw.subspan(ip_len, ip.total_length - ip_len);
  std::size_t header_len = 0;
  if (ip.protocol == static_cast<std::uint8_t>(Protocol::Tcp)) {
    if (segment.size() < kTcpMinHeader) fail(ErrorCode::TruncatedPacket, "TCP header cut short");
    TcpHeader tcp;
    tcp.src_port = load_be16(&segment[0]);
    tcp.dst_port = load_be16(&segment[2]);
    tcp.seq_num = load_be32(&segment[4]);
    tcp.ack_num = load_be32(&segment[8]);
    tcp.data_offset = segment[12] >> 4;
    tcp.reserved = segment[12] & 0x0F;
    tcp.flags = segment[13];
    tcp.window = load_be16(&segment[14]);
    tcp.checksum = load_be16(&segment[16]);
    tcp.urgent_ptr = load_be16(&segment[18]);
    if (tcp.data_offset < 5) {
      fail(ErrorCode::MalformedHeader, "TCP data offset " + std::to_string(tcp.data_offset));
    }
    header_len = std::size_t{tcp.data_offset} * 4;
    if (segment.size() < header_len) fail(ErrorCode::TruncatedPacket, "TCP options cut short");
    tcp.options.assign(segment.begin() + kTcpMinHeader,
                       segment.begin() + static_cast<long>(header_len));
    pkt.transport = std::move(tcp);
  } else {
    if (segment.size() < kUdpHeader) fail(ErrorCode::TruncatedPacket, "UDP header cut short");
    UdpHeader udp;
    udp.src_port = load_be16(&segment[0]);
    udp.dst_port = load_be16(&segment[2]);
    udp.length = load_be16(&segment[4]);
    udp.checksum = load_be16(&segment[6]);
    header_len = kUdpHeader;
    pkt.transport = udp;
  }
  pkt.payload.assign(segment.begin() + static_cast<long>(header_len), segment.end());
  pkt.link_padding.assign(raw.begin() + ip.total_length, raw.end());
  return pkt;
}

namespace {

void append_ip_header(const Ipv4Header& ip, Bytes& out) {
  const std::size_t at = out.size();
  out.resize(at + kIpv4MinHeader);
  std::uint8_t* p = out.data() + at;
  p[0] = static_cast<std::uint8_t>((ip.version << 4) | (ip.ihl & 0x0F));
  p[1] = ip.tos;
  store_be16(p + 2, ip.total_length);
  store_be16(p + 4, ip.identification);
  store_be16(p + 6, ip.flags_fragment);
  p[8] = ip.ttl;
  p[9] = ip.protocol;
  store_be16(p + 10, ip.header_checksum);
  store_be32(p + 12, ip.src_addr);
  store_be32(p + 16, ip.dst_addr);
  out.insert(out.end(), ip.options.begin(), ip.options.end());
}

void append_transport_header(const ParsedPacket& pkt, Bytes& out) {
  const std::size_t at = out.size();
  if (pkt.is_tcp()) {
    const TcpHeader& tcp = pkt.tcp();
    out.resize(at + kTcpMinHeader);
    std::uint8_t* p = out.data() + at;
    store_be16(p, tcp.src_port);
    store_be16(p + 2, tcp.dst_port);
    store_be32(p + 4, tcp.seq_num);
    store_be32(p + 8, tcp.ack_num);
    p[12] = static_cast<std::uint8_t>((tcp.data_offset << 4) | (tcp.reserved & 0x0F));
    p[13] = tcp.flags;
    store_be16(p + 14, tcp.window);
    store_be16(p + 16, tcp.checksum);
    store_be16(p + 18, tcp.urgent_ptr);
    out.insert(out.end(), tcp.options.begin(), tcp.options.end());
  } else {
    const UdpHeader& udp = pkt.udp();
    out.resize(at + kUdpHeader);
    std::uint8_t* p = out.data() + at;
    store_be16(p, udp.src_port);
    store_be16(p + 2, udp.dst_port);
    store_be16(p + 4, udp.length);
    store_be16(p + 6, udp.checksum);
  }
}

// Pseudo-header + transport header (checksum as stored) + payload.
void accumulate_transport(const ParsedPacket& pkt, ChecksumAccumulator& acc) {
  const std::size_t transport_len = pkt.transport_header_length() + pkt.payload.size();
  acc.add_u32(pkt.ip.src_addr);
  acc.add_u32(pkt.ip.dst_addr);
  acc.add_u16(pkt.ip.protocol);  // zero byte + protocol
  acc.add_u16(static_cast<std::uint16_t>(transport_len));
  Bytes header;
  header.reserve(pkt.transport_header_length());
  append_transport_header(pkt, header);
  acc.add(header);
  acc.add(pkt.payload);
}

}  // namespace

Bytes serialize(const ParsedPacket& pkt) {
  Bytes out;
  out.reserve(pkt.computed_total_length() + pkt.link_padding.size());
  append_ip_header(pkt.ip, out);
  append_transport_header(pkt, out);
  out.insert(out.end(), pkt.payload.begin(), pkt.payload.end());
  out.insert(out.end(), pkt.link_padding.begin(), pkt.link_padding.end());
  return out;
}

Bytes serialize_transport_header(const ParsedPacket& pkt) {
  Bytes out;
  append_transport_header(pkt, out);
  return out;
}

std::uint16_t ipv4_header_checksum(const ParsedPacket& pkt) {
  Ipv4Header ip = pkt.ip;
  ip.header_checksum = 0;
  Bytes header;
  append_ip_header(ip, header);
  return ones_complement_checksum(header);
}

std::uint16_t transport_checksum(const ParsedPacket& pkt) {
  ParsedPacket copy_header_only;
  copy_header_only.ip = pkt.ip;
  copy_header_only.transport = pkt.transport;
  if (copy_header_only.is_tcp()) {
    copy_header_only.tcp().checksum = 0;
  } else {
    copy_header_only.udp().checksum = 0;
  }
  ChecksumAccumulator acc;
  const std::size_t transport_len = pkt.transport_header_length() + pkt.payload.size();
  acc.add_u32(pkt.ip.src_addr);
  acc.add_u32(pkt.ip.dst_addr);
  acc.add_u16(pkt.ip.protocol);
  acc.add_u16(static_cast<std::uint16_t>(transport_len));
  Bytes header;
  append_transport_header(copy_header_only, header);
  acc.add(header);
  acc.add(pkt.payload);
  return acc.checksum();
}

void refresh_lengths(ParsedPacket& pkt) {
  const std::size_t total = pkt.computed_total_length();
  if (total > kMaxTotalLength) {
    fail(ErrorCode::PacketTooLarge,
         "total_length " + std::to_string(total) + " exceeds " + std::to_string(kMaxTotalLength));
  }
  pkt.ip.ihl = static_cast<std::uint8_t>(pkt.ip.header_length() / 4);
  pkt.ip.total_length = static_cast<std::uint16_t>(total);
  if (pkt.is_tcp()) {
    pkt.tcp().data_offset = static_cast<std::uint8_t>(pkt.tcp().header_length() / 4);
  } else {
    pkt.udp().length = static_cast<std::uint16_t>(kUdpHeader + pkt.payload.size());
  }
}

ParsedPacket finalize(ParsedPacket pkt) {
  refresh_lengths(pkt);
  pkt.ip.header_checksum = ipv4_header_checksum(pkt);
  if (pkt.is_tcp()) {
    pkt.tcp().checksum = transport_checksum(pkt);
  } else if (pkt.udp().checksum != 0) {
    const std::uint16_t sum = transport_checksum(pkt);
    // RFC 768: a computed zero is transmitted as all ones.
    pkt.udp().checksum = sum == 0 ? 0xFFFF : sum;
  }
  return pkt;
}

std::uint16_t verify_ip_checksum(const ParsedPacket& pkt) {
  Bytes header;
  append_ip_header(pkt.ip, header);
  return ones_complement_checksum(header);
}

std::uint16_t verify_transport_checksum(const ParsedPacket& pkt) {
  if (pkt.is_udp() && pkt.udp().checksum == 0) return 0;
  ChecksumAccumulator acc;
  accumulate_transport(pkt, acc);
  return acc.checksum();
}

namespace {

const char* first_violation(const ParsedPacket& pkt) noexcept {
  if (pkt.ip.version != 4) return "IP version is not 4";
  if (pkt.ip.ihl < 5 || std::size_t{pkt.ip.ihl} * 4 != pkt.ip.header_length()) {
    return "ihl disagrees with options length";
  }
  if (pkt.ip.total_length != pkt.computed_total_length()) return "total_length mismatch";
  if (pkt.is_tcp()) {
    if (pkt.ip.protocol != static_cast<std::uint8_t>(Protocol::Tcp)) return "protocol mismatch";
    const TcpHeader& tcp = pkt.tcp();
    if (tcp.data_offset < 5 || std::size_t{tcp.data_offset} * 4 != tcp.header_length()) {
      return "TCP data offset disagrees with options length";
    }
  } else {
    if (pkt.ip.protocol != static_cast<std::uint8_t>(Protocol::Udp)) return "protocol mismatch";
    if (pkt.udp().length != kUdpHeader + pkt.payload.size()) return "UDP length mismatch";
  }
  if (verify_ip_checksum(pkt) != 0) return "IP header checksum does not verify";
  if (verify_transport_checksum(pkt) != 0) return "transport checksum does not verify";
  return nullptr;
}

}  // namespace

bool is_consistent(const ParsedPacket& pkt) noexcept { return first_violation(pkt) == nullptr; }

void validate(const ParsedPacket& pkt) {
  if (const char* why = first_violation(pkt)) fail(ErrorCode::MalformedHeader, why);
}

std::size_t transport_view_payload_offset(const ParsedPacket& pkt) noexcept {
  // TCP: seq, ack, offset/flags, window, checksum, urgent (16) + options.
  return pkt.is_tcp() ? pkt.tcp().header_length() - 4 : kUdpHeader - 4;
}

Bytes transport_view(const ParsedPacket& pkt) {
  Bytes header = serialize_transport_header(pkt);
  Bytes view;
  view.reserve(header.size() - 4 + pkt.payload.size());
  view.insert(view.end(), header.begin() + 4, header.end());
  if (pkt.is_tcp()) {
    view[12] = 0;  // checksum at header offset 16
    view[13] = 0;
  } else {
    view[2] = 0;  // checksum at header offset 6
    view[3] = 0;
  }
  view.insert(view.end(), pkt.payload.begin(), pkt.payload.end());
  return view;
}

ParsedPacket make_tcp_packet(const Endpoints& ep, std::uint32_t seq, std::uint32_t ack,
                             std::uint16_t window, std::uint16_t urgent, ByteView payload,
                             std::uint8_t flags) {
  ParsedPacket pkt;
  pkt.ip.protocol = static_cast<std::uint8_t>(Protocol::Tcp);
  pkt.ip.src_addr = ep.src_addr;
  pkt.ip.dst_addr = ep.dst_addr;
  pkt.ip.flags_fragment = 0x4000;  // DF
  TcpHeader tcp;
  tcp.src_port = ep.src_port;
  tcp.dst_port = ep.dst_port;
  tcp.seq_num = seq;
  tcp.ack_num = ack;
  tcp.flags = flags;
  tcp.window = window;
  tcp.urgent_ptr = urgent;
  pkt.transport = std::move(tcp);
  pkt.payload.assign(payload.begin(), payload.end());
  return finalize(std::move(pkt));
}

ParsedPacket make_udp_packet(const Endpoints& ep, ByteView payload) {
  ParsedPacket pkt;
  pkt.ip.protocol = static_cast<std::uint8_t>(Protocol::Udp);
  pkt.ip.src_addr = ep.src_addr;
  pkt.ip.dst_addr = ep.dst_addr;
  UdpHeader udp;
  udp.src_port = ep.src_port;
  udp.dst_port = ep.dst_port;
  udp.checksum = 0xFFFF;  // any nonzero value enables checksum computation
  pkt.transport = udp;
  pkt.payload.assign(payload.begin(), payload.end());
  return finalize(std::move(pkt));
}

}  // namespace advpad::net
