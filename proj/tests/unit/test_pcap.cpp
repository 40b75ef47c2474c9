#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "advpad/error.hpp"
#include "advpad/net/pcap.hpp"
#include "fixtures.hpp"

using namespace advpad;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("advpad_test_" + name);
}

net::PcapFile sample_file(bool big_endian, std::uint32_t linktype) {
  std::mt19937_64 rng(big_endian ? 1 : 2);
  net::PcapFile f;
  f.big_endian = big_endian;
  f.linktype = linktype;
  for (int i = 0; i < 25; ++i) {
    net::PcapRecord r;
    r.ts_sec = static_cast<std::uint32_t>(1700000000 + i);
    r.ts_usec = static_cast<std::uint32_t>(rng() % 1000000);
    r.data = net::serialize(fixture::random_packet(rng));
    if (linktype == net::kLinktypeEthernet) {
      Bytes eth(14, 0x11);
      eth[12] = 0x08;
      eth[13] = 0x00;
      r.data.insert(r.data.begin(), eth.begin(), eth.end());
    }
    r.orig_len = static_cast<std::uint32_t>(r.data.size());
    f.records.push_back(r);
  }
  return f;
}

}  // namespace

TEST(Pcap, EmptyCapture) {
  net::PcapFile f;
  const net::PcapFile g = net::parse_pcap(net::encode_pcap(f));
  EXPECT_TRUE(g.records.empty());
  EXPECT_EQ(g, f);
}

TEST(Pcap, RoundTripBothByteOrders) {
  for (bool be : {false, true}) {
    for (std::uint32_t lt : {net::kLinktypeRaw, net::kLinktypeEthernet}) {
      const net::PcapFile f = sample_file(be, lt);
      const Bytes enc = net::encode_pcap(f);
      const net::PcapFile g = net::parse_pcap(enc);
      EXPECT_EQ(g, f);
      EXPECT_EQ(net::encode_pcap(g), enc);
    }
  }
}

TEST(Pcap, FileRoundTrip) {
  const net::PcapFile f = sample_file(false, net::kLinktypeEthernet);
  const auto path = temp_path("rt.pcap");
  net::write_pcap(path, f);
  EXPECT_EQ(net::read_pcap(path), f);
  std::filesystem::remove(path);
}

TEST(Pcap, BadMagic) {
  Bytes enc = net::encode_pcap(sample_file(false, net::kLinktypeRaw));
  enc[0] = 0;
  try {
    net::parse_pcap(enc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadMagic);
  }
}

TEST(Pcap, TruncatedRecord) {
  Bytes enc = net::encode_pcap(sample_file(false, net::kLinktypeRaw));
  enc.resize(enc.size() - 3);
  try {
    net::parse_pcap(enc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TruncatedRecord);
  }
}

TEST(Pcap, SplitLinkFrames) {
  const Bytes ip = net::serialize(net::make_udp_packet({}, Bytes{1, 2, 3}));
  Bytes eth(14, 0);
  eth[12] = 0x08;
  const Bytes frame = net::join_link_frame(eth, ip);
  const auto split = net::split_link_frame(net::kLinktypeEthernet, frame);
  ASSERT_TRUE(split.has_value());
  EXPECT_EQ(split->ip_bytes, ip);
  EXPECT_EQ(split->link_header, eth);

  Bytes arp = eth;
  arp[13] = 0x06;
  arp.resize(42, 0);
  EXPECT_FALSE(net::split_link_frame(net::kLinktypeEthernet, arp).has_value());
  EXPECT_TRUE(net::split_link_frame(net::kLinktypeRaw, ip).has_value());
}

TEST(HexLines, RoundTripSkipsComments) {
  const auto path = temp_path("lines.hex");
  const std::vector<Bytes> pkts = {{1, 2, 3}, {0xff}};
  net::write_hex_lines(path, pkts);
  {
    std::FILE* f = std::fopen(path.c_str(), "a");
    std::fputs("# note\n\n", f);
    std::fclose(f);
  }
  EXPECT_EQ(net::read_hex_lines(path), pkts);
  std::filesystem::remove(path);
}
