#include <benchmark/benchmark.h>

#include <random>

#include "advpad/net/checksum.hpp"
#include "advpad/net/packet.hpp"
#include "advpad/perturb/cache.hpp"
#include "advpad/perturb/perturb.hpp"
#include "advpad/rl/env.hpp"
#include "advpad/rl/policy.hpp"
#include "advpad/rl/train.hpp"

using namespace advpad;

namespace {

Bytes random_bytes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Bytes out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

net::ParsedPacket tcp_packet(std::size_t payload) {
  return net::make_tcp_packet({}, 1000, 2000, 65535, 0, random_bytes(payload, 1));
}

void BM_Checksum(benchmark::State& state) {
  const Bytes data = random_bytes(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(net::ones_complement_checksum(data));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Checksum)->Arg(64)->Arg(1500)->Arg(9000);

void BM_PrePad(benchmark::State& state) {
  const auto pkt = tcp_packet(1000);
  const Bytes adv = random_bytes(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(perturb::pre_pad(pkt, adv));
}
BENCHMARK(BM_PrePad)->Arg(8)->Arg(32);

void BM_PrePadRoundTrip(benchmark::State& state) {
  const auto pkt = tcp_packet(1000);
  const Bytes adv = random_bytes(32, 4);
  for (auto _ : state) {
    const auto out = perturb::pre_pad(pkt, adv);
    benchmark::DoNotOptimize(net::serialize(perturb::de_perturb(out.packet, out.record)));
  }
}
BENCHMARK(BM_PrePadRoundTrip);

void BM_CachePad(benchmark::State& state) {
  const auto wire = net::serialize(tcp_packet(1000));
  perturb::SequenceCache cache;
  for (std::uint64_t i = 0; i < 256; ++i) cache.entries.push_back(perturb::random_sequence(32, i));
  std::mt19937_64 rng(5);
  for (auto _ : state) {
    const auto out = perturb::cache_pad(net::parse_packet(wire), cache, rng);
    benchmark::DoNotOptimize(net::serialize(out.packet));
  }
}
BENCHMARK(BM_CachePad);

rl::HeadedModelConfig bench_policy_config() {
  rl::TrainConfig c;
  c.encoder = {256, 32, 2, 1, 64, 64, 32};
  c.head_hidden = 64;
  return c.actor_model();
}

void BM_PolicyForward(benchmark::State& state) {
  const rl::PolicyModel policy(bench_policy_config());
  const auto s = rl::env_reset(tcp_packet(200), 32, perturb::Scheme::PrePad);
  const Bytes obs = rl::policy_observation(s, bench_policy_config().encoder);
  for (auto _ : state) benchmark::DoNotOptimize(policy.distribution(obs, s.step));
}
BENCHMARK(BM_PolicyForward);

void BM_PolicyRollout(benchmark::State& state) {
  const rl::PolicyModel policy(bench_policy_config());
  const auto pkt = tcp_packet(200);
  std::mt19937_64 rng(6);
  for (auto _ : state) benchmark::DoNotOptimize(rl::perturb_with_policy(policy, pkt, 32, perturb::Scheme::PrePad, rng));
}
BENCHMARK(BM_PolicyRollout);

}  // namespace

BENCHMARK_MAIN();
