#include "advpad/perturb/cache.hpp"

#include <chrono>
#include <fstream>

#include "advpad/error.hpp"
#include "json.hpp"

namespace advpad::perturb {

SequenceCache build_cache(const SequenceSource& source, std::span<const net::ParsedPacket> samples,
                          std::size_t k, std::size_t len, std::string policy_version) {
  if (k == 0) fail(ErrorCode::EmptyCache, "cache size k must be at least 1");
  if (samples.empty()) fail(ErrorCode::EmptyCache, "no sample packets to roll out on");
  SequenceCache cache;
  cache.policy_version = std::move(policy_version);
  cache.generation_timestamp = std::chrono::duration_cast<std::chrono::seconds>(
                                   std::chrono::system_clock::now().time_since_epoch())
                                   .count();
  cache.entries.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    Bytes seq = source(samples[i % samples.size()], len);
    if (seq.size() != len) {
      fail(ErrorCode::InconsistentRecord, "sequence source returned " + std::to_string(seq.size()) +
                                              " bytes, expected " + std::to_string(len));
    }
    cache.entries.push_back({std::move(seq), Provenance::Cache});
  }
  return cache;
}

Perturbed cache_pad(const net::ParsedPacket& pkt, const SequenceCache& cache, std::mt19937_64& rng) {
  if (cache.entries.empty()) fail(ErrorCode::EmptyCache, "sequence cache is empty");
  std::uniform_int_distribution<std::size_t> pick(0, cache.entries.size() - 1);
  return pre_pad(pkt, cache.entries[pick(rng)].bytes);
}

void write_cache(const std::filesystem::path& path, const SequenceCache& cache) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  nlohmann::json header;
  header["len"] = cache.sequence_length();
  header["k"] = cache.entries.size();
  header["policy_version"] = cache.policy_version;
  out << header.dump() << '\n';
  for (const auto& entry : cache.entries) out << to_hex(entry.bytes) << '\n';
}

SequenceCache read_cache(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::EmptyCache, "cache file has no header");
  SequenceCache cache;
  std::size_t len = 0;
  std::size_t k = 0;
  try {
    const auto header = nlohmann::json::parse(line);
    len = header.at("len").get<std::size_t>();
    k = header.at("k").get<std::size_t>();
    cache.policy_version = header.at("policy_version").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ProtocolError, std::string("bad cache header: ") + e.what());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Bytes seq = from_hex(line);
    if (seq.size() != len) fail(ErrorCode::ProtocolError, "cache entry length differs from header");
    cache.entries.push_back({std::move(seq), Provenance::Cache});
  }
  if (cache.entries.size() != k) fail(ErrorCode::ProtocolError, "cache entry count differs from header");
  if (cache.entries.empty()) fail(ErrorCode::EmptyCache, "cache file holds no sequences");
  return cache;
}

}  // namespace advpad::perturb
