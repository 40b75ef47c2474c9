#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "advpad/error.hpp"
#include "advpad/perturb/cache.hpp"
#include "advpad/perturb/sidecar.hpp"
#include "fixtures.hpp"

using namespace advpad;

namespace {

perturb::SequenceSource counting_source() {
  return [n = 0](const net::ParsedPacket&, std::size_t len) mutable {
    return Bytes(len, static_cast<std::uint8_t>(n++));
  };
}

}  // namespace

TEST(Sidecar, LineRoundTrip) {
  perturb::SidecarEntry e;
  e.index = 42;
  e.record.scheme = perturb::Scheme::PrePad;
  e.record.header_bytes_used = 12;
  e.record.payload_insert_len = 20;
  for (std::size_t i = 0; i < 12; ++i) e.record.original_fields[i] = static_cast<std::uint8_t>(i * 17);
  const std::string line = perturb::encode_sidecar_line(e);
  EXPECT_EQ(perturb::decode_sidecar_line(line), e);
  EXPECT_NE(line.find("\"original_fields_hex\":\"00112233445566778899aabb\""), std::string::npos);
}

TEST(Sidecar, FileRoundTripAndErrors) {
  std::vector<perturb::SidecarEntry> entries(3);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].index = i;
    entries[i].record.scheme = perturb::Scheme::PostPad;
    entries[i].record.payload_insert_len = i;
  }
  const auto path = std::filesystem::temp_directory_path() / "advpad_test_sidecar.jsonl";
  perturb::write_sidecar(path, entries);
  EXPECT_EQ(perturb::read_sidecar(path), entries);
  std::filesystem::remove(path);
  EXPECT_THROW(perturb::decode_sidecar_line("{bad"), Error);
  EXPECT_THROW(perturb::decode_sidecar_line(R"({"index":0,"scheme":"prepad","header_bytes_used":13,)"
                                            R"("payload_insert_len":0,"original_fields_hex":"000000000000000000000000"})"),
               Error);
}

TEST(Cache, EntriesHaveRequestedLength) {
  std::mt19937_64 rng(1);
  std::vector<net::ParsedPacket> samples = {fixture::random_tcp(rng), fixture::random_udp(rng)};
  const auto cache = perturb::build_cache(counting_source(), samples, 7, 24, "v1");
  ASSERT_EQ(cache.entries.size(), 7u);
  for (const auto& e : cache.entries) {
    EXPECT_EQ(e.bytes.size(), 24u);
    EXPECT_EQ(e.provenance, perturb::Provenance::Cache);
  }
  EXPECT_EQ(cache.sequence_length(), 24u);
  EXPECT_EQ(cache.policy_version, "v1");
}

TEST(Cache, SingleEntryAlwaysApplied) {
  std::mt19937_64 rng(2);
  std::vector<net::ParsedPacket> samples = {fixture::random_tcp(rng)};
  const auto cache = perturb::build_cache(counting_source(), samples, 1, 16, "v");
  for (int i = 0; i < 50; ++i) {
    const net::ParsedPacket p = fixture::random_packet(rng);
    const auto out = perturb::cache_pad(p, cache, rng);
    EXPECT_EQ(net::serialize(out.packet), net::serialize(perturb::pre_pad(p, cache.entries[0].bytes).packet));
  }
}

TEST(Cache, ErrorsAndFileRoundTrip) {
  std::mt19937_64 rng(3);
  std::vector<net::ParsedPacket> samples = {fixture::random_tcp(rng)};
  EXPECT_THROW(perturb::build_cache(counting_source(), samples, 0, 8, "v"), Error);
  perturb::SequenceCache empty;
  try {
    perturb::cache_pad(samples[0], empty, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyCache);
  }
  const auto cache = perturb::build_cache(counting_source(), samples, 5, 8, "abc");
  const auto path = std::filesystem::temp_directory_path() / "advpad_test_cache.jsonl";
  perturb::write_cache(path, cache);
  const auto back = perturb::read_cache(path);
  ASSERT_EQ(back.entries.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(back.entries[i].bytes, cache.entries[i].bytes);
  EXPECT_EQ(back.policy_version, "abc");
  std::filesystem::remove(path);
}
