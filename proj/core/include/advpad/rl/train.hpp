#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "advpad/classifier/oracle.hpp"
#include "advpad/perturb/cache.hpp"
#include "advpad/rl/env.hpp"
#include "advpad/rl/policy.hpp"
#include "advpad/rl/reward.hpp"

namespace advpad::rl {

// One MDP transition as recorded during a rollout.
struct StepRecord {
  Bytes observation;  // policy input for s_t (already truncated)
  std::size_t step = 1;
  int action = 0;
  double log_prob_old = 0.0;
  double reward = 0.0;
  double value = 0.0;  // critic estimate V(s_t) at rollout time
};

struct Trajectory {
  std::vector<StepRecord> steps;
  net::ParsedPacket final_packet;
  Bytes actions;
  bool terminal = false;
};

struct StepTargets {
  double ret = 0.0;
  double advantage = 0.0;
};

// return_t = sum_k discount^(k-t) r_k, advantage_t = return_t - V(s_t).
std::vector<StepTargets> compute_returns_and_advantages(const Trajectory& trajectory, double discount);
// Zero mean, unit variance (centred only when the spread is negligible).
// When every return in the batch is equal the advantages are set to zero.
void normalize_advantages(std::span<StepTargets> targets);

// A training sample: a recorded step plus its targets.
struct Sample {
  Bytes observation;
  std::size_t step = 1;
  int action = 0;
  double log_prob_old = 0.0;
  double advantage = 0.0;
  double ret = 0.0;
};

enum class EntropyForm {
  Sampled,  // -pi(a|s) log pi(a|s) at the taken action
  Full,     // Shannon entropy of pi(.|s)
};

struct ActorSettings {
  double alpha = 1.0;
  bool clip_enabled = true;
  double clip_epsilon = 0.2;
  EntropyForm entropy_form = EntropyForm::Full;
};

struct ActorTerms {
  double objective = 0.0;  // policy_term + alpha * entropy_term
  double policy_term = 0.0;
  double entropy_term = 0.0;
  double mean_ratio = 0.0;
  std::vector<double> weights;  // importance weights after clipping
};

// J = mean_i[w_i log pi(a_i|s_i) A_i] + alpha mean_i[h_i], with w_i the
// importance ratio pi/pi_old treated as a constant (zeroed where the PPO clip
// applies). When `grads` is given, dJ/dtheta is accumulated into it. With
// `frozen_weights` the weights are taken from there instead of recomputed,
// which makes J a smooth function for finite-difference checks.
ActorTerms actor_objective(const PolicyModel& policy, std::span<const Sample> batch, const ActorSettings& settings,
                           nn::Gradients* grads, const std::vector<double>* frozen_weights = nullptr);
// mean_i (V(s_i) - R_i)^2, gradient accumulated into `grads` when given.
double critic_loss(const CriticModel& critic, std::span<const Sample> batch, nn::Gradients* grads);

struct Optimizers {
  nn::AdamW actor;
  nn::AdamW critic;
};

// Single ascent step on J (throws NaNLoss on non-finite values).
ActorTerms actor_update(PolicyModel& policy, nn::AdamW& optimizer, std::span<const Sample> batch,
                        const ActorSettings& settings, double max_grad_norm);
double critic_update(CriticModel& critic, nn::AdamW& optimizer, std::span<const Sample> batch,
                     double max_grad_norm);

struct TrainConfig {
  RewardMode reward_mode = RewardMode::BlackBox;
  DistanceOn distance_on = DistanceOn::Embedding;
  perturb::Scheme scheme = perturb::Scheme::PrePad;
  std::size_t budget = 32;
  double temperature = 1.0;
  double alpha = 1.0;
  double discount = 0.99;
  bool clip_enabled = true;
  double clip_epsilon = 0.2;
  bool normalize_advantages = true;
  EntropyForm entropy_form = EntropyForm::Full;
  std::uint64_t seed = 1;
  double actor_lr = 1e-5;
  double critic_lr = 1e-4;
  double weight_decay = 0.01;
  std::size_t batch_size = 32;
  int update_epochs = 2;
  double max_grad_norm = 1.0;
  std::size_t max_episodes = 0;  // 0: one pass over the training packets
  EncoderConfig encoder;
  int head_hidden = 64;

  HeadedModelConfig actor_model() const;
  HeadedModelConfig critic_model() const;
};

// Flat key=value config (one per line, '#' comments) or a JSON object.
// Unknown keys throw Config.
TrainConfig parse_train_config(const std::string& text, TrainConfig base = {});
std::string train_config_json(const TrainConfig& config);

struct TrainStats {
  std::size_t episode = 0;
  std::size_t update = 0;
  double mean_episode_reward = 0.0;
  double actor_objective = 0.0;
  double critic_loss = 0.0;
  double mean_entropy = 0.0;
};

struct TrainResult {
  PolicyModel policy;
  CriticModel critic;
  std::size_t episodes = 0;
  std::size_t updates = 0;
  std::vector<TrainStats> history;
};

// Runs one episode from `packet`. Without an oracle no rewards are computed.
// `greedy` takes the argmax action instead of sampling.
Trajectory rollout(const PolicyModel& policy, const CriticModel* critic, const classifier::Oracle* oracle,
                   const net::ParsedPacket& packet, std::size_t budget, perturb::Scheme scheme,
                   RewardMode mode, DistanceOn distance, std::mt19937_64& rng, bool greedy = false);

// Actor-critic training. Episodes are collected until the buffer holds at
// least batch_size steps, then update_epochs passes of minibatch updates
// follow. Deterministic for a fixed seed. `on_update` sees each update.
TrainResult train(std::span<const net::ParsedPacket> packets, const classifier::Oracle& oracle,
                  const TrainConfig& config, const std::function<void(const TrainStats&)>& on_update = {});

// Adversarial sequence from one policy rollout (no oracle involved).
Bytes generate_sequence(const PolicyModel& policy, const net::ParsedPacket& packet, std::size_t budget,
                        perturb::Scheme scheme, std::mt19937_64& rng, bool greedy = false);
perturb::Perturbed perturb_with_policy(const PolicyModel& policy, const net::ParsedPacket& packet,
                                       std::size_t budget, perturb::Scheme scheme, std::mt19937_64& rng,
                                       bool greedy = false);

// Cache of k sampled policy sequences of length `len`, rolled out on `samples`.
perturb::SequenceCache build_cache(const PolicyModel& policy, std::span<const net::ParsedPacket> samples,
                                   std::size_t k, std::size_t len, std::uint64_t seed);

Bytes policy_observation(const EnvState& state, const EncoderConfig& encoder);

}  // namespace advpad::rl
