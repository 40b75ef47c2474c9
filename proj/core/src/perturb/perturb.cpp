#include "advpad/perturb/perturb.hpp"

#include <algorithm>
#include <random>

#include "advpad/error.hpp"

namespace advpad::perturb {

using net::ParsedPacket;

std::string_view scheme_name(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::PrePad: return "prepad";
    case Scheme::PostPad: return "postpad";
    case Scheme::FixedPad: return "fixedpad";
  }
  return "prepad";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "prepad") return Scheme::PrePad;
  if (name == "postpad") return Scheme::PostPad;
  if (name == "fixedpad") return Scheme::FixedPad;
  fail(ErrorCode::Config, "unknown scheme '" + std::string(name) + "'");
}

HeaderFieldBlock read_header_fields(const net::TcpHeader& tcp) noexcept {
  HeaderFieldBlock block{};
  store_be32(&block[0], tcp.seq_num);
  store_be32(&block[4], tcp.ack_num);
  store_be16(&block[8], tcp.window);
  store_be16(&block[10], tcp.urgent_ptr);
  return block;
}

void write_header_fields(net::TcpHeader& tcp, const HeaderFieldBlock& block) noexcept {
  tcp.seq_num = load_be32(&block[0]);
  tcp.ack_num = load_be32(&block[4]);
  tcp.window = load_be16(&block[8]);
  tcp.urgent_ptr = load_be16(&block[10]);
}

void write_header_field_byte(net::TcpHeader& tcp, std::size_t index, std::uint8_t value) {
  if (index >= kHeaderFieldBytes) fail(ErrorCode::InconsistentRecord, "field byte index out of range");
  HeaderFieldBlock block = read_header_fields(tcp);
  block[index] = value;
  write_header_fields(tcp, block);
}

ParsedPacket seal_pre_pad(ParsedPacket working, const HeaderFieldBlock& original_fields,
                          std::size_t payload_insert_len, bool perturbed) {
  if (working.is_tcp() && perturbed) {
    if (payload_insert_len > kMaxTcpInsert) {
      fail(ErrorCode::SequenceTooLong, "TCP payload insertion of " +
                                           std::to_string(payload_insert_len) +
                                           " bytes does not fit the trailer length byte");
    }
    working.payload.insert(working.payload.end(), original_fields.begin(), original_fields.end());
    working.payload.push_back(static_cast<std::uint8_t>(payload_insert_len));
    working.payload.push_back(kTrailerMagic0);
    working.payload.push_back(kTrailerMagic1);
  }
  return net::finalize(std::move(working));
}

Perturbed pre_pad(const ParsedPacket& pkt, ByteView adv) {
  Perturbed out;
  out.record.scheme = Scheme::PrePad;
  if (adv.empty()) {
    out.packet = net::finalize(pkt);
    return out;
  }
  const std::size_t trailer = pkt.is_tcp() ? kTrailerLength : 0;
  if (pkt.computed_total_length() + adv.size() + trailer > net::kMaxTotalLength) {
    fail(ErrorCode::PacketTooLarge, "pre-padding by " + std::to_string(adv.size()) +
                                        " bytes exceeds the IPv4 length limit");
  }
  ParsedPacket working = pkt;
  std::size_t header_used = 0;
  if (working.is_tcp()) {
    header_used = std::min(adv.size(), kHeaderFieldBytes);
    out.record.original_fields = read_header_fields(working.tcp());
    HeaderFieldBlock block = out.record.original_fields;
    std::copy_n(adv.begin(), header_used, block.begin());
    write_header_fields(working.tcp(), block);
  }
  const ByteView inserted = adv.subspan(header_used);
  working.payload.insert(working.payload.begin(), inserted.begin(), inserted.end());
  out.record.header_bytes_used = static_cast<std::uint8_t>(header_used);
  out.record.payload_insert_len = inserted.size();
  out.packet = seal_pre_pad(std::move(working), out.record.original_fields,
                            out.record.payload_insert_len, true);
  return out;
}

namespace {

[[noreturn]] void inconsistent(const std::string& why) {
  fail(ErrorCode::InconsistentRecord, why);
}

ParsedPacket undo_pre_pad_tcp(const ParsedPacket& pkt, const PerturbationRecord& record) {
  const Bytes& payload = pkt.payload;
  if (payload.size() < kTrailerLength + record.payload_insert_len) {
    inconsistent("payload too short for trailer and recorded insertion");
  }
  const std::size_t trailer_at = payload.size() - kTrailerLength;
  if (payload[trailer_at + 13] != kTrailerMagic0 || payload[trailer_at + 14] != kTrailerMagic1) {
    inconsistent("reversal trailer magic not found");
  }
  if (payload[trailer_at + 12] != record.payload_insert_len) {
    inconsistent("trailer insertion length disagrees with record");
  }
  HeaderFieldBlock original{};
  std::copy_n(payload.begin() + static_cast<long>(trailer_at), kHeaderFieldBytes, original.begin());
  if (original != record.original_fields) inconsistent("trailer field values disagree with record");

  ParsedPacket out = pkt;
  write_header_fields(out.tcp(), original);
  out.payload.assign(payload.begin() + static_cast<long>(record.payload_insert_len),
                     payload.begin() + static_cast<long>(trailer_at));
  return net::finalize(std::move(out));
}

}  // namespace

ParsedPacket de_perturb(const ParsedPacket& pkt, const PerturbationRecord& record) {
  if (record.header_bytes_used > kHeaderFieldBytes) inconsistent("header_bytes_used exceeds 12");
  if (record.total_budget() == 0) return net::finalize(pkt);

  if (record.scheme == Scheme::PrePad) {
    if (pkt.is_tcp()) {
      if (record.header_bytes_used < kHeaderFieldBytes && record.payload_insert_len > 0) {
        inconsistent("payload insertion recorded before the header fields were exhausted");
      }
      return undo_pre_pad_tcp(pkt, record);
    }
    if (record.header_bytes_used != 0) inconsistent("UDP record claims header bytes");
    if (pkt.payload.size() < record.payload_insert_len) {
      inconsistent("payload_insert_len exceeds payload length");
    }
    ParsedPacket out = pkt;
    out.payload.erase(out.payload.begin(),
                      out.payload.begin() + static_cast<long>(record.payload_insert_len));
    return net::finalize(std::move(out));
  }

  if (record.header_bytes_used != 0) inconsistent("post/fixed padding records no header bytes");
  if (pkt.payload.size() < record.payload_insert_len) {
    inconsistent("appended length exceeds payload length");
  }
  ParsedPacket out = pkt;
  out.payload.resize(out.payload.size() - record.payload_insert_len);
  return net::finalize(std::move(out));
}

Perturbed de_perturb_from_trailer(const ParsedPacket& pkt) {
  if (!pkt.is_tcp()) inconsistent("trailer-based reversal needs a TCP packet");
  if (pkt.payload.size() < kTrailerLength) inconsistent("payload shorter than trailer");
  const std::size_t trailer_at = pkt.payload.size() - kTrailerLength;
  PerturbationRecord record;
  record.scheme = Scheme::PrePad;
  std::copy_n(pkt.payload.begin() + static_cast<long>(trailer_at), kHeaderFieldBytes,
              record.original_fields.begin());
  record.payload_insert_len = pkt.payload[trailer_at + 12];
  // Any insertion implies the full field block was consumed first; without
  // insertion the number of overwritten bytes is recoverable only by diff.
  if (record.payload_insert_len > 0) {
    record.header_bytes_used = kHeaderFieldBytes;
  } else {
    const HeaderFieldBlock now = read_header_fields(pkt.tcp());
    std::size_t used = kHeaderFieldBytes;
    while (used > 0 && now[used - 1] == record.original_fields[used - 1]) --used;
    // An all-identical block still carried a trailer, so at least one byte
    // was consumed.
    record.header_bytes_used = static_cast<std::uint8_t>(std::max<std::size_t>(used, 1));
  }
  return {undo_pre_pad_tcp(pkt, record), record};
}

ParsedPacket post_pad(const ParsedPacket& pkt, ByteView adv) {
  if (pkt.computed_total_length() + adv.size() > net::kMaxTotalLength) {
    fail(ErrorCode::PacketTooLarge, "post-padding exceeds the IPv4 length limit");
  }
  ParsedPacket out = pkt;
  out.payload.insert(out.payload.end(), adv.begin(), adv.end());
  return net::finalize(std::move(out));
}

ParsedPacket fixed_pad(const ParsedPacket& pkt, std::size_t target_len) {
  const std::size_t current = pkt.computed_total_length();
  if (current > target_len) {
    fail(ErrorCode::AlreadyLonger, "packet of " + std::to_string(current) +
                                       " bytes exceeds target " + std::to_string(target_len));
  }
  if (target_len > net::kMaxTotalLength) {
    fail(ErrorCode::PacketTooLarge, "target length exceeds the IPv4 length limit");
  }
  ParsedPacket out = pkt;
  out.payload.resize(out.payload.size() + (target_len - current), 0x00);
  return net::finalize(std::move(out));
}

PerturbationRecord post_pad_record(std::size_t appended) {
  PerturbationRecord record;
  record.scheme = Scheme::PostPad;
  record.payload_insert_len = appended;
  return record;
}

PerturbationRecord fixed_pad_record(const ParsedPacket& pkt, std::size_t target_len) {
  PerturbationRecord record;
  record.scheme = Scheme::FixedPad;
  const std::size_t current = pkt.computed_total_length();
  record.payload_insert_len = target_len > current ? target_len - current : 0;
  return record;
}

AdversarialByteSequence random_sequence(std::size_t len, std::uint64_t seed) {
  AdversarialByteSequence out;
  out.provenance = Provenance::Random;
  out.bytes.resize(len);
  std::mt19937_64 engine(seed);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < len; ++i) {
    if (i % 8 == 0) word = engine();
    out.bytes[i] = static_cast<std::uint8_t>(word >> (8 * (i % 8)));
  }
  return out;
}

}  // namespace advpad::perturb
