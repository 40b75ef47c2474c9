#pragma once

#include <random>

#include "advpad/net/packet.hpp"

namespace advpad::fixture {

inline Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
  Bytes out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

inline net::Endpoints random_endpoints(std::mt19937_64& rng) {
  return {static_cast<std::uint32_t>(rng()), static_cast<std::uint32_t>(rng()), static_cast<std::uint16_t>(rng()),
          static_cast<std::uint16_t>(rng())};
}

inline net::ParsedPacket random_tcp(std::mt19937_64& rng, std::size_t max_payload = 200) {
  net::ParsedPacket p = net::make_tcp_packet(random_endpoints(rng), static_cast<std::uint32_t>(rng()),
                                             static_cast<std::uint32_t>(rng()), static_cast<std::uint16_t>(rng()),
                                             static_cast<std::uint16_t>(rng()),
                                             random_bytes(rng, rng() % (max_payload + 1)));
  if (rng() % 4 == 0) {
    p.tcp().options = random_bytes(rng, 4 * (1 + rng() % 3));
    p.tcp().data_offset = static_cast<std::uint8_t>(5 + p.tcp().options.size() / 4);
    p = net::finalize(p);
  }
  return p;
}

inline net::ParsedPacket random_udp(std::mt19937_64& rng, std::size_t max_payload = 200) {
  return net::make_udp_packet(random_endpoints(rng), random_bytes(rng, rng() % (max_payload + 1)));
}

inline net::ParsedPacket random_packet(std::mt19937_64& rng, std::size_t max_payload = 200) {
  return rng() % 3 == 0 ? random_udp(rng, max_payload) : random_tcp(rng, max_payload);
}

}  // namespace advpad::fixture
