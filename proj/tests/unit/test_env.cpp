#include <gtest/gtest.h>

#include <random>

#include "advpad/error.hpp"
#include "advpad/rl/env.hpp"
#include "fixtures.hpp"

using namespace advpad;
using perturb::Scheme;

namespace {

rl::EnvState play(const net::ParsedPacket& p, ByteView actions, Scheme scheme) {
  rl::EnvState s = rl::env_reset(p, actions.size(), scheme);
  for (std::uint8_t a : actions) s = rl::env_step(s, a).next;
  return s;
}

}  // namespace

TEST(Env, ResetIsDeterministicAndHoldsInput) {
  std::mt19937_64 rng(1);
  const net::ParsedPacket p = fixture::random_tcp(rng);
  const rl::EnvState a = rl::env_reset(p, 8, Scheme::PrePad);
  const rl::EnvState b = rl::env_reset(p, 8, Scheme::PrePad);
  EXPECT_EQ(a.working, b.working);
  EXPECT_EQ(a.working, p);
  EXPECT_EQ(a.step, 1u);
  EXPECT_FALSE(a.done());
  EXPECT_EQ(rl::observe(a), net::transport_view(p));
}

TEST(Env, BudgetOneTerminatesAfterOneStep) {
  std::mt19937_64 rng(2);
  const rl::EnvState s = rl::env_reset(fixture::random_udp(rng), 1, Scheme::PrePad);
  const rl::StepResult r = rl::env_step(s, 7);
  EXPECT_TRUE(r.done);
  EXPECT_TRUE(r.next.done());
  try {
    rl::env_step(r.next, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EpisodeFinished);
  }
}

TEST(Env, InvalidResets) {
  std::mt19937_64 rng(3);
  const net::ParsedPacket p = fixture::random_tcp(rng);
  EXPECT_THROW(rl::env_reset(p, 0, Scheme::PrePad), Error);
  EXPECT_THROW(rl::env_reset(p, 4, Scheme::FixedPad), Error);
}

TEST(Env, TcpBudgetTwelveTouchesOnlyHeaderFields) {
  std::mt19937_64 rng(4);
  const net::ParsedPacket p = fixture::random_tcp(rng);
  const Bytes actions = fixture::random_bytes(rng, 12);
  rl::EnvState s = rl::env_reset(p, 12, Scheme::PrePad);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    s = rl::env_step(s, actions[i]).next;
    if (!s.done()) EXPECT_EQ(s.working.payload, p.payload);
  }
  const auto fields = perturb::read_header_fields(s.working.tcp());
  EXPECT_TRUE(std::equal(actions.begin(), actions.end(), fields.begin()));
  EXPECT_TRUE(std::equal(p.payload.begin(), p.payload.end(), s.working.payload.begin()));
  EXPECT_EQ(s.working.payload.size(), p.payload.size() + perturb::kTrailerLength);
}

TEST(Env, UdpEveryStepInserts) {
  std::mt19937_64 rng(5);
  const net::ParsedPacket p = fixture::random_udp(rng);
  rl::EnvState s = rl::env_reset(p, 5, Scheme::PrePad);
  for (int i = 0; i < 5; ++i) {
    s = rl::env_step(s, static_cast<std::uint8_t>(0x10 + i)).next;
    EXPECT_EQ(s.working.payload.size(), p.payload.size() + i + 1);
    EXPECT_EQ(s.working.payload[static_cast<std::size_t>(i)], 0x10 + i);
    EXPECT_EQ(s.working.udp().src_port, p.udp().src_port);
  }
}

TEST(Env, ReplayEqualsPrePad) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 500; ++i) {
    const net::ParsedPacket p = fixture::random_packet(rng);
    const Bytes actions = fixture::random_bytes(rng, 1 + rng() % 40);
    const rl::EnvState s = play(p, actions, Scheme::PrePad);
    ASSERT_EQ(net::serialize(s.working), net::serialize(perturb::pre_pad(p, actions).packet));
  }
}

TEST(Env, ReplayEqualsPostPad) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const net::ParsedPacket p = fixture::random_packet(rng);
    const Bytes actions = fixture::random_bytes(rng, 1 + rng() % 40);
    const rl::EnvState s = play(p, actions, Scheme::PostPad);
    ASSERT_EQ(net::serialize(s.working), net::serialize(perturb::post_pad(p, actions)));
  }
}

TEST(Env, StepDependsOnlyOnStateAndAction) {
  std::mt19937_64 rng(8);
  const net::ParsedPacket p = fixture::random_tcp(rng);
  rl::EnvState copy = rl::env_reset(p, 20, Scheme::PrePad);
  for (std::uint8_t a : {1, 2, 3}) copy = rl::env_step(copy, a).next;
  const rl::EnvState again = copy;
  EXPECT_EQ(rl::env_step(copy, 9).next.working, rl::env_step(again, 9).next.working);
  EXPECT_EQ(rl::env_step(copy, 9).next.working, rl::env_step(copy, 9).next.working);
  // Intermediate states keep lengths consistent.
  EXPECT_EQ(copy.working.ip.total_length, copy.working.computed_total_length());
}
