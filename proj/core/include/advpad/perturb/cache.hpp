#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "advpad/perturb/perturb.hpp"

namespace advpad::perturb {

// Pre-generated adversarial sequences, sampled uniformly at perturbation time
// so the online path needs no model inference.
struct SequenceCache {
  std::vector<AdversarialByteSequence> entries;
  std::int64_t generation_timestamp = 0;
  std::string policy_version;

  std::size_t sequence_length() const noexcept {
    return entries.empty() ? 0 : entries.front().bytes.size();
  }
};

// Produces one complete adversarial sequence of the requested length for a
// sample packet (e.g. a policy rollout).
using SequenceSource = std::function<Bytes(const net::ParsedPacket& sample, std::size_t len)>;

// Cycles over `samples` until `k` sequences have been emitted.
SequenceCache build_cache(const SequenceSource& source, std::span<const net::ParsedPacket> samples,
                          std::size_t k, std::size_t len, std::string policy_version);

Perturbed cache_pad(const net::ParsedPacket& pkt, const SequenceCache& cache, std::mt19937_64& rng);

// Header line {"len":L,"k":K,"policy_version":"..."}, then one hex sequence
// per line.
void write_cache(const std::filesystem::path& path, const SequenceCache& cache);
SequenceCache read_cache(const std::filesystem::path& path);

}  // namespace advpad::perturb
