#include "advpad/eval/synthetic.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <random>

#include "advpad/error.hpp"
#include "advpad/net/pcap.hpp"

namespace advpad::eval {

namespace {

Bytes arp_frame(std::mt19937_64& rng) {
  Bytes f(42, 0);
  std::fill(f.begin(), f.begin() + 6, 0xFF);
  for (int i = 6; i < 12; ++i) f[i] = static_cast<std::uint8_t>(rng());
  f[12] = 0x08;
  f[13] = 0x06;
  for (std::size_t i = 14; i < f.size(); ++i) f[i] = static_cast<std::uint8_t>(rng());
  return f;
}

Bytes ethernet_wrap(ByteView ip) {
  Bytes f(14, 0);
  for (int i = 0; i < 12; ++i) f[i] = static_cast<std::uint8_t>(0x02 + i);
  f[12] = 0x08;
  f[13] = 0x00;
  f.insert(f.end(), ip.begin(), ip.end());
  return f;
}

}  // namespace

SyntheticData synthesize(const SyntheticConfig& config) {
  if (config.classes < 1 || config.packets_per_class < 1) fail(ErrorCode::Config, "empty synthetic config");
  if (config.classes * config.class_set_size > 256) fail(ErrorCode::Config, "class byte sets exceed 256 values");
  if (config.min_length < 60 || config.max_length < config.min_length || config.max_length > 65535) {
    fail(ErrorCode::Config, "synthetic lengths must satisfy 60 <= min <= max <= 65535");
  }
  if (config.motif_max_offset < config.motif_min_offset) fail(ErrorCode::Config, "bad motif offsets");

  std::mt19937_64 rng(config.seed);
  std::array<std::uint8_t, 256> perm{};
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  struct ClassSpec {
    std::vector<std::uint8_t> bytes;
    std::array<std::uint8_t, 4> motif{};
  };
  std::vector<ClassSpec> specs(static_cast<std::size_t>(config.classes));
  for (int c = 0; c < config.classes; ++c) {
    auto& spec = specs[static_cast<std::size_t>(c)];
    spec.bytes.assign(perm.begin() + c * config.class_set_size, perm.begin() + (c + 1) * config.class_set_size);
    for (auto& b : spec.motif) b = static_cast<std::uint8_t>(rng());
  }
  const std::vector<std::uint8_t> neutral(perm.begin() + config.classes * config.class_set_size, perm.end());
  const bool use_neutral = config.neutral_filler && !neutral.empty();
  std::uniform_int_distribution<std::size_t> pick_neutral(0, neutral.empty() ? 0 : neutral.size() - 1);

  std::uniform_int_distribution<std::size_t> length_dist(config.min_length, config.max_length);
  std::uniform_int_distribution<std::size_t> motif_dist(config.motif_min_offset, config.motif_max_offset);
  std::uniform_int_distribution<int> run_dist(1, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Build every flow first, then emit flows in shuffled order.
  std::vector<std::vector<RawFrame>> flows;
  for (int c = 0; c < config.classes; ++c) {
    const auto& spec = specs[static_cast<std::size_t>(c)];
    std::uniform_int_distribution<std::size_t> pick(0, spec.bytes.size() - 1);
    int remaining = config.packets_per_class;
    while (remaining > 0) {
      const int n = std::min(remaining, config.flow_length);
      remaining -= n;
      const bool tcp = unit(rng) < config.tcp_fraction;
      net::Endpoints client;
      client.src_addr = 0x0A000000u | static_cast<std::uint32_t>(rng() & 0xFFFFFF);
      client.dst_addr = 0xC0A80000u | static_cast<std::uint32_t>(rng() & 0xFFFF);
      client.src_port = static_cast<std::uint16_t>(1024 + rng() % 60000);
      client.dst_port = static_cast<std::uint16_t>(tcp ? 443 : 1024 + rng() % 60000);
      if (!tcp && (client.dst_port == 67 || client.dst_port == 68)) client.dst_port = 5000;
      net::Endpoints server{client.dst_addr, client.src_addr, client.dst_port, client.src_port};

      std::vector<RawFrame> flow;
      int direction = 0;
      int run_left = run_dist(rng);
      for (int k = 0; k < n; ++k) {
        if (run_left == 0) {
          direction ^= 1;
          run_left = run_dist(rng);
        }
        --run_left;
        const std::size_t total = length_dist(rng);
        const std::size_t transport = tcp ? net::kTcpMinHeader : net::kUdpHeader;
        const std::size_t view_offset = tcp ? 16 : 4;
        Bytes payload(total - net::kIpv4MinHeader - transport);
        const std::size_t signal = config.signal_bytes > view_offset ? config.signal_bytes - view_offset : 0;
        for (std::size_t i = 0; i < payload.size(); ++i) {
          if (i < signal) {
            payload[i] = unit(rng) < config.class_byte_probability ? spec.bytes[pick(rng)]
                                                                    : static_cast<std::uint8_t>(rng());
          } else {
            payload[i] = use_neutral ? neutral[pick_neutral(rng)] : static_cast<std::uint8_t>(rng());
          }
        }
        const std::size_t at = motif_dist(rng);
        if (at + 4 <= payload.size()) std::copy(spec.motif.begin(), spec.motif.end(), payload.begin() + static_cast<long>(at));

        const net::Endpoints& ep = direction == 0 ? client : server;
        net::ParsedPacket pkt;
        if (tcp) {
          pkt = net::make_tcp_packet(ep, static_cast<std::uint32_t>(rng()), static_cast<std::uint32_t>(rng()),
                                     static_cast<std::uint16_t>(rng()), 0, payload);
        } else {
          pkt = net::make_udp_packet(ep, payload);
        }
        pkt.ip.identification = static_cast<std::uint16_t>(rng());
        pkt = net::finalize(std::move(pkt));
        flow.push_back({net::serialize(pkt), net::kLinktypeRaw, c, 0, direction});
      }
      flows.push_back(std::move(flow));
    }
    for (int k = 0; k < config.noise_frames_per_class; ++k) {
      if (k % 2 == 0) {
        flows.push_back({{arp_frame(rng), net::kLinktypeEthernet, c, 0, 0}});
      } else {
        net::Endpoints dhcp{0, 0xFFFFFFFF, 68, 67};
        Bytes body(240);
        for (auto& b : body) b = static_cast<std::uint8_t>(rng());
        flows.push_back({{ethernet_wrap(net::serialize(net::make_udp_packet(dhcp, body))), net::kLinktypeEthernet, c,
                          0, 0}});
      }
    }
  }
  std::shuffle(flows.begin(), flows.end(), rng);

  SyntheticData out;
  std::int64_t flow_id = 0;
  for (auto& flow : flows) {
    for (auto& f : flow) {
      f.flow_id = flow_id;
      out.frames.push_back(std::move(f));
    }
    ++flow_id;
  }
  for (int c = 0; c < config.classes; ++c) out.class_names.push_back("class" + std::to_string(c));
  return out;
}

}  // namespace advpad::eval
