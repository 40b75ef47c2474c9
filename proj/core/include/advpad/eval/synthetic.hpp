#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advpad/eval/dataset.hpp"

namespace advpad::eval {

// Synthetic traffic whose class signal sits at the front of each packet:
// every class owns a disjoint set of byte values that dominates the first
// `signal_bytes` view bytes, plus a 4-byte motif placed at a random payload
// offset in [motif_min_offset, motif_max_offset]. Later payload bytes are
// filler drawn from the values no class owns (or uniform bytes when
// neutral_filler is off). TCP header fields are random.
struct SyntheticConfig {
  int classes = 5;
  int packets_per_class = 2000;
  std::size_t min_length = 60;  // IP total length
  std::size_t max_length = 1400;
  double tcp_fraction = 0.8;
  int flow_length = 20;
  std::size_t signal_bytes = 32;  // view bytes carrying the class distribution
  int class_set_size = 24;
  double class_byte_probability = 0.6;
  std::size_t motif_min_offset = 0;
  std::size_t motif_max_offset = 12;
  bool neutral_filler = true;
  // Extra ARP and DHCP frames per class, to exercise preprocessing.
  int noise_frames_per_class = 0;
  std::uint64_t seed = 2024;
};

struct SyntheticData {
  std::vector<RawFrame> frames;
  std::vector<std::string> class_names;
};

SyntheticData synthesize(const SyntheticConfig& config);

}  // namespace advpad::eval
