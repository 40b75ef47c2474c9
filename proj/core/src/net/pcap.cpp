#include "advpad/net/pcap.hpp"

#include <fstream>
#include <iterator>

#include "advpad/error.hpp"

namespace advpad::net {

namespace {

constexpr std::size_t kGlobalHeader = 24;
constexpr std::size_t kRecordHeader = 16;

struct Reader {
  ByteView data;
  bool big_endian;

  std::uint32_t u32(std::size_t at) const {
    const std::uint8_t* p = &data[at];
    if (big_endian) return load_be32(p);
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }
  std::uint16_t u16(std::size_t at) const {
    const std::uint8_t* p = &data[at];
    if (big_endian) return load_be16(p);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
};

struct Writer {
  Bytes& out;
  bool big_endian;

  void u32(std::uint32_t v) {
    if (big_endian) {
      out.push_back(static_cast<std::uint8_t>(v >> 24));
      out.push_back(static_cast<std::uint8_t>(v >> 16));
      out.push_back(static_cast<std::uint8_t>(v >> 8));
      out.push_back(static_cast<std::uint8_t>(v));
    } else {
      out.push_back(static_cast<std::uint8_t>(v));
      out.push_back(static_cast<std::uint8_t>(v >> 8));
      out.push_back(static_cast<std::uint8_t>(v >> 16));
      out.push_back(static_cast<std::uint8_t>(v >> 24));
    }
  }
  void u16(std::uint16_t v) {
    if (big_endian) {
      out.push_back(static_cast<std::uint8_t>(v >> 8));
      out.push_back(static_cast<std::uint8_t>(v));
    } else {
      out.push_back(static_cast<std::uint8_t>(v));
      out.push_back(static_cast<std::uint8_t>(v >> 8));
    }
  }
};

}  // namespace

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, ByteView contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(contents.data()),
            static_cast<std::streamsize>(contents.size()));
  if (!out) fail(ErrorCode::Io, "short write to " + path.string());
}

PcapFile parse_pcap(ByteView contents) {
  if (contents.size() < 4) fail(ErrorCode::BadMagic, "file too short for a pcap magic");
  PcapFile file;
  const std::uint32_t magic_be = load_be32(contents.data());
  if (magic_be == kPcapMagic) {
    file.big_endian = true;
  } else if (magic_be == 0xD4C3B2A1) {
    file.big_endian = false;
  } else {
    fail(ErrorCode::BadMagic, "not a classic pcap file");
  }
  if (contents.size() < kGlobalHeader) fail(ErrorCode::TruncatedRecord, "global header cut short");
  const Reader r{contents, file.big_endian};
  file.version_major = r.u16(4);
  file.version_minor = r.u16(6);
  file.thiszone = static_cast<std::int32_t>(r.u32(8));
  file.sigfigs = r.u32(12);
  file.snaplen = r.u32(16);
  file.linktype = r.u32(20);

  std::size_t at = kGlobalHeader;
  while (at < contents.size()) {
    if (contents.size() - at < kRecordHeader) {
      fail(ErrorCode::TruncatedRecord, "record header cut short at offset " + std::to_string(at));
    }
    PcapRecord rec;
    rec.ts_sec = r.u32(at);
    rec.ts_usec = r.u32(at + 4);
    const std::uint32_t incl_len = r.u32(at + 8);
    rec.orig_len = r.u32(at + 12);
    at += kRecordHeader;
    if (contents.size() - at < incl_len) {
      fail(ErrorCode::TruncatedRecord, "record data cut short at offset " + std::to_string(at));
    }
    rec.data.assign(contents.begin() + static_cast<long>(at),
                    contents.begin() + static_cast<long>(at + incl_len));
    at += incl_len;
    file.records.push_back(std::move(rec));
  }
  return file;
}

PcapFile read_pcap(const std::filesystem::path& path) { return parse_pcap(read_file(path)); }

Bytes encode_pcap(const PcapFile& file) {
  Bytes out;
  Writer w{out, file.big_endian};
  w.u32(kPcapMagic);
  w.u16(file.version_major);
  w.u16(file.version_minor);
  w.u32(static_cast<std::uint32_t>(file.thiszone));
  w.u32(file.sigfigs);
  w.u32(file.snaplen);
  w.u32(file.linktype);
  for (const PcapRecord& rec : file.records) {
    w.u32(rec.ts_sec);
    w.u32(rec.ts_usec);
    w.u32(static_cast<std::uint32_t>(rec.data.size()));
    w.u32(rec.orig_len);
    out.insert(out.end(), rec.data.begin(), rec.data.end());
  }
  return out;
}

void write_pcap(const std::filesystem::path& path, const PcapFile& file) {
  write_file(path, encode_pcap(file));
}

std::optional<LinkFrame> split_link_frame(std::uint32_t linktype, ByteView frame) {
  LinkFrame out;
  std::size_t ip_at = 0;
  if (linktype == kLinktypeEthernet) {
    if (frame.size() < 14) return std::nullopt;
    std::size_t type_at = 12;
    std::uint16_t ethertype = load_be16(&frame[type_at]);
    while (ethertype == 0x8100 || ethertype == 0x88A8) {  // VLAN / QinQ tags
      type_at += 4;
      if (frame.size() < type_at + 2) return std::nullopt;
      ethertype = load_be16(&frame[type_at]);
    }
    if (ethertype != 0x0800) return std::nullopt;
    ip_at = type_at + 2;
  } else if (linktype == kLinktypeRaw || linktype == kLinktypeIpv4) {
    ip_at = 0;
  } else {
    return std::nullopt;
  }
  if (frame.size() <= ip_at || (frame[ip_at] >> 4) != 4) return std::nullopt;
  out.link_header.assign(frame.begin(), frame.begin() + static_cast<long>(ip_at));
  out.ip_bytes.assign(frame.begin() + static_cast<long>(ip_at), frame.end());
  return out;
}

Bytes join_link_frame(ByteView link_header, ByteView ip_bytes) {
  Bytes out(link_header.begin(), link_header.end());
  out.insert(out.end(), ip_bytes.begin(), ip_bytes.end());
  return out;
}

std::vector<Bytes> read_hex_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::vector<Bytes> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    out.push_back(from_hex(line));
  }
  return out;
}

void write_hex_lines(const std::filesystem::path& path, const std::vector<Bytes>& packets) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  for (const Bytes& pkt : packets) out << to_hex(pkt) << '\n';
}

}  // namespace advpad::net
