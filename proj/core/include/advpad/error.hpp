#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace advpad {

// Every failure the library reports carries one of these categories. The CLI
// prints the category name verbatim so scripts can match on it.
enum class ErrorCode {
  // packet model
  TruncatedPacket,
  UnsupportedProtocol,
  MalformedHeader,
  PacketTooLarge,
  BadMagic,
  TruncatedRecord,
  // perturbation
  InconsistentRecord,
  AlreadyLonger,
  SequenceTooLong,
  EmptyCache,
  // classifier
  EmptyInput,
  OracleUnavailable,
  ProtocolError,
  CapabilityUnsupported,
  DegenerateDataset,
  // rl
  NonPositiveTemperature,
  EpisodeFinished,
  NaNLoss,
  // evaluation
  EmptyAfterFiltering,
  // cli / plumbing
  Usage,
  Io,
  Config,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace advpad
