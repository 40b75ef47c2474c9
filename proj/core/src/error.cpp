#include "advpad/error.hpp"

#include "advpad/bytes.hpp"

namespace advpad {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::TruncatedPacket: return "TruncatedPacket";
    case ErrorCode::UnsupportedProtocol: return "UnsupportedProtocol";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::PacketTooLarge: return "PacketTooLarge";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedRecord: return "TruncatedRecord";
    case ErrorCode::InconsistentRecord: return "InconsistentRecord";
    case ErrorCode::AlreadyLonger: return "AlreadyLonger";
    case ErrorCode::SequenceTooLong: return "SequenceTooLong";
    case ErrorCode::EmptyCache: return "EmptyCache";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::OracleUnavailable: return "OracleUnavailable";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::CapabilityUnsupported: return "CapabilityUnsupported";
    case ErrorCode::DegenerateDataset: return "DegenerateDataset";
    case ErrorCode::NonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::EpisodeFinished: return "EpisodeFinished";
    case ErrorCode::NaNLoss: return "NaNLoss";
    case ErrorCode::EmptyAfterFiltering: return "EmptyAfterFiltering";
    case ErrorCode::Usage: return "Usage";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.resize(bytes.size() * 2);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    out[2 * i] = kDigits[bytes[i] >> 4];
    out[2 * i + 1] = kDigits[bytes[i] & 0x0F];
  }
  return out;
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) fail(ErrorCode::ProtocolError, "hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) fail(ErrorCode::ProtocolError, "invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

}  // namespace advpad
