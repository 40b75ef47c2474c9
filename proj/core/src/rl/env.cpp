#include "advpad/rl/env.hpp"

#include <algorithm>

#include "advpad/error.hpp"

namespace advpad::rl {

std::size_t EnvState::header_steps() const noexcept {
  if (scheme != perturb::Scheme::PrePad || !working.is_tcp()) return 0;
  return std::min(budget, perturb::kHeaderFieldBytes);
}

EnvState env_reset(const net::ParsedPacket& packet, std::size_t budget, perturb::Scheme scheme) {
  if (budget == 0) fail(ErrorCode::Config, "episode budget must be at least 1");
  if (scheme == perturb::Scheme::FixedPad) {
    fail(ErrorCode::Config, "the environment supports prepad and postpad only");
  }
  EnvState state;
  state.working = packet;
  state.budget = budget;
  state.scheme = scheme;
  if (packet.is_tcp()) state.original_fields = perturb::read_header_fields(packet.tcp());
  return state;
}

StepResult env_step(const EnvState& state, std::uint8_t action) {
  if (state.done()) fail(ErrorCode::EpisodeFinished, "episode already used its whole budget");
  EnvState next = state;
  if (next.scheme == perturb::Scheme::PostPad) {
    next.working.payload.push_back(action);
    ++next.inserted;
  } else if (next.step <= next.header_steps()) {
    perturb::write_header_field_byte(next.working.tcp(), next.step - 1, action);
  } else {
    next.working.payload.insert(next.working.payload.begin() + static_cast<long>(next.inserted), action);
    ++next.inserted;
  }
  ++next.step;
  if (next.done()) {
    if (next.scheme == perturb::Scheme::PrePad) {
      next.working = perturb::seal_pre_pad(std::move(next.working), next.original_fields, next.inserted, true);
    } else {
      next.working = net::finalize(std::move(next.working));
    }
  } else {
    net::refresh_lengths(next.working);
  }
  const bool done = next.done();
  return {std::move(next), done};
}

Bytes observe(const EnvState& state) { return net::transport_view(state.working); }

}  // namespace advpad::rl
