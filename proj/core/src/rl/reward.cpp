#include "advpad/rl/reward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "advpad/error.hpp"

namespace advpad::rl {

RewardMode parse_reward_mode(std::string_view name) {
  if (name == "blackbox") return RewardMode::BlackBox;
  if (name == "whitebox") return RewardMode::WhiteBox;
  fail(ErrorCode::Config, "unknown reward mode '" + std::string(name) + "'");
}

std::string_view reward_mode_name(RewardMode mode) noexcept {
  return mode == RewardMode::BlackBox ? "blackbox" : "whitebox";
}

DistanceOn parse_distance_on(std::string_view name) {
  if (name == "embedding") return DistanceOn::Embedding;
  if (name == "distribution") return DistanceOn::Distribution;
  fail(ErrorCode::Config, "distance_on must be embedding or distribution, got '" + std::string(name) + "'");
}

std::string_view distance_on_name(DistanceOn d) noexcept {
  return d == DistanceOn::Embedding ? "embedding" : "distribution";
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) fail(ErrorCode::ProtocolError, "distributions differ in length");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    kl += p[i] * (std::log(p[i]) - std::log(std::max(q[i], 1e-12)));
  }
  // Rounding can leave a tiny negative value for near-identical inputs.
  return std::max(kl, 0.0);
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::ProtocolError, "vectors differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

classifier::Want reward_want(RewardMode mode, DistanceOn distance) noexcept {
  if (mode == RewardMode::BlackBox) return {};
  return {true, distance == DistanceOn::Embedding};
}

double whitebox_reward(const classifier::Prediction& before, const classifier::Prediction& after,
                       DistanceOn distance) {
  if (!before.distribution || !after.distribution) {
    fail(ErrorCode::CapabilityUnsupported, "white-box reward needs output distributions");
  }
  const double kl = kl_divergence(*before.distribution, *after.distribution);
  if (distance == DistanceOn::Distribution) {
    return kl + euclidean_distance(*before.distribution, *after.distribution);
  }
  if (!before.embedding || !after.embedding) {
    fail(ErrorCode::CapabilityUnsupported, "white-box reward needs embeddings");
  }
  return kl + euclidean_distance(*before.embedding, *after.embedding);
}

double blackbox_reward(const classifier::Prediction& before, const classifier::Prediction& after) noexcept {
  return before.label != after.label ? 1.0 : 0.0;
}

double reward_whitebox(const classifier::Oracle& oracle, ByteView s_t, ByteView s_next, DistanceOn distance) {
  const classifier::Want want = reward_want(RewardMode::WhiteBox, distance);
  classifier::require_capabilities(oracle.capabilities(), want);
  return whitebox_reward(oracle.predict(s_t, want), oracle.predict(s_next, want), distance);
}

double reward_blackbox(const classifier::Oracle& oracle, ByteView s_t, ByteView s_next) {
  return blackbox_reward(oracle.predict(s_t, {}), oracle.predict(s_next, {}));
}

}  // namespace advpad::rl
