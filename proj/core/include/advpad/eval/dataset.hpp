#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "advpad/bytes.hpp"
#include "advpad/classifier/toy_classifier.hpp"
#include "advpad/net/packet.hpp"

namespace advpad::eval {

// A captured frame awaiting preprocessing.
struct RawFrame {
  Bytes bytes;
  std::uint32_t linktype = 101;  // pcap linktype; 101 = raw IP
  int label = 0;
  std::int64_t flow_id = -1;  // -1: derive from the 5-tuple
  int direction = -1;         // -1: derive from the 5-tuple
};

// One preprocessed packet. `view` is what classifiers see: the transport
// header without ports (checksum zeroed) followed by the payload.
struct PacketSample {
  net::ParsedPacket packet;
  Bytes view;
  int label = 0;
  std::int64_t flow_id = 0;
  int direction = 0;
};

struct Splits {
  std::vector<std::size_t> train, val, test;
};

struct LabeledDataset {
  std::vector<PacketSample> samples;
  Splits splits;
  std::vector<std::string> class_names;  // index = label

  int num_classes() const noexcept { return static_cast<int>(class_names.size()); }
  std::vector<classifier::Example> examples(std::span<const std::size_t> indices) const;
  std::vector<net::ParsedPacket> packets(std::span<const std::size_t> indices) const;
};

struct PreprocessStats {
  std::size_t input = 0;
  std::size_t non_ipv4 = 0;   // ARP, IPv6, unparsable frames
  std::size_t other_protocol = 0;
  std::size_t dhcp = 0;
  std::size_t no_payload = 0;
  std::size_t too_short = 0;  // view shorter than kMinViewLength
  std::size_t kept = 0;
};

inline constexpr std::size_t kMinViewLength = 20;

// Drops non-IPv4 frames, non-TCP/UDP packets, DHCP (UDP 67/68), packets
// without payload and views shorter than 20 bytes, then shuffles indices
// with `seed` and splits them 8:1:1 (each split kept in capture order).
// Throws EmptyAfterFiltering when nothing survives.
LabeledDataset preprocess(std::span<const RawFrame> frames, std::vector<std::string> class_names,
                          std::uint64_t seed, PreprocessStats* stats = nullptr);

// floor(0.8 n) / floor(0.1 n) / rest.
Splits split_indices(std::size_t n, std::uint64_t seed);

// Every *.pcap in `dir` listed in labels.csv (filename,label). Class names
// are sorted so label ids are stable.
std::vector<RawFrame> read_pcap_directory(const std::filesystem::path& dir, const std::filesystem::path& labels_csv,
                                          std::vector<std::string>& class_names);
// JSONL {bytes_hex, label, flow_id, direction}; bytes are raw IPv4 packets.
std::vector<RawFrame> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, std::span<const RawFrame> frames);

// Preprocessed dataset on disk: one JSON header line {"classes": [...]}, then
// one line per sample {bytes_hex, label, flow_id, direction, split}.
void save_dataset(const std::filesystem::path& path, const LabeledDataset& ds);
LabeledDataset load_dataset(const std::filesystem::path& path);

}  // namespace advpad::eval
