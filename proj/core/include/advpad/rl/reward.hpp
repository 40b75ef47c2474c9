#pragma once

#include <span>
#include <string_view>

#include "advpad/classifier/oracle.hpp"

namespace advpad::rl {

enum class RewardMode { BlackBox, WhiteBox };
// Which oracle output the distance term of the white-box reward compares.
enum class DistanceOn { Embedding, Distribution };

RewardMode parse_reward_mode(std::string_view name);  // "blackbox" | "whitebox"
std::string_view reward_mode_name(RewardMode mode) noexcept;
DistanceOn parse_distance_on(std::string_view name);  // "embedding" | "distribution"
std::string_view distance_on_name(DistanceOn d) noexcept;

// KL(p || q) in nats; q entries are floored at 1e-12.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

// Oracle queries needed to score a state under `mode`.
classifier::Want reward_want(RewardMode mode, DistanceOn distance = DistanceOn::Embedding) noexcept;

// Rewards from predictions already obtained for s_t and s_{t+1}.
double whitebox_reward(const classifier::Prediction& before, const classifier::Prediction& after,
                       DistanceOn distance = DistanceOn::Embedding);
double blackbox_reward(const classifier::Prediction& before, const classifier::Prediction& after) noexcept;

// KL(dist(s_t) || dist(s_{t+1})) + ||rep(s_t) - rep(s_{t+1})||; throws
// CapabilityUnsupported unless the oracle is white-box.
double reward_whitebox(const classifier::Oracle& oracle, ByteView s_t, ByteView s_next,
                       DistanceOn distance = DistanceOn::Embedding);
// 1 iff the predicted label changes.
double reward_blackbox(const classifier::Oracle& oracle, ByteView s_t, ByteView s_next);

}  // namespace advpad::rl
