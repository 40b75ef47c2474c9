#pragma once

#include <cstdint>

#include "advpad/net/packet.hpp"
#include "advpad/perturb/perturb.hpp"

namespace advpad::rl {

// One packet being perturbed byte by byte. `step` is the 1-based index of the
// next action; the state after the final action has step == budget + 1 and
// holds the sealed (trailer appended, finalized) packet.
struct EnvState {
  net::ParsedPacket working;
  perturb::HeaderFieldBlock original_fields{};
  std::size_t step = 1;
  std::size_t budget = 0;
  perturb::Scheme scheme = perturb::Scheme::PrePad;
  std::size_t inserted = 0;  // bytes inserted before (PrePad) or after (PostPad) the payload

  bool done() const noexcept { return step > budget; }
  // Number of leading steps that overwrite TCP header fields.
  std::size_t header_steps() const noexcept;
};

struct StepResult {
  EnvState next;
  bool done = false;
};

// Throws Config for a zero budget or the FixedPad scheme.
EnvState env_reset(const net::ParsedPacket& packet, std::size_t budget, perturb::Scheme scheme);

// PrePad on TCP: the first min(budget, 12) steps overwrite the seq/ack/
// window/urgent block in order, later steps insert before the payload after
// any previously inserted bytes. PrePad on UDP inserts every byte. PostPad
// appends at the end. Intermediate states refresh length fields but keep
// stale checksums. Throws EpisodeFinished once done.
StepResult env_step(const EnvState& state, std::uint8_t action);

// The bytes a classifier (and the policy) sees for this state.
Bytes observe(const EnvState& state);

}  // namespace advpad::rl
