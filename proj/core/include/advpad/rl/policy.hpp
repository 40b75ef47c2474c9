#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "advpad/nn/tape.hpp"

namespace advpad::rl {

struct EncoderConfig {
  int vocab = 256;
  int model_dim = 64;
  int heads = 4;
  int layers = 2;
  int ff_dim = 128;
  int max_input = 256;  // longer observations keep their first max_input bytes
  int max_steps = 64;   // step embeddings; later steps share the last row

  bool operator==(const EncoderConfig&) const = default;
};

// Pre-norm transformer encoder over byte tokens. A learned step token is
// prepended and its final hidden state is the fixed-size state embedding.
class SequenceEncoder {
 public:
  SequenceEncoder() = default;
  SequenceEncoder(const EncoderConfig& config, nn::ParameterStore& params, std::mt19937_64& rng);

  nn::Tape::Var encode(nn::Tape& tape, std::span<const std::uint8_t> tokens, std::size_t step) const;
  const EncoderConfig& config() const noexcept { return config_; }

 private:
  struct Layer {
    nn::ParamId ln1_g, ln1_b, qkv_w, qkv_b, out_w, out_b, ln2_g, ln2_b, ff1_w, ff1_b, ff2_w, ff2_b;
  };
  EncoderConfig config_;
  nn::ParamId byte_embedding_, position_embedding_, step_embedding_, final_g_, final_b_;
  std::vector<Layer> layers_;
};

// Encoder followed by an MLP head (or a linear one when head_hidden == 0).
struct HeadedModelConfig {
  EncoderConfig encoder;
  int head_hidden = 64;
  int outputs = 256;
  std::uint64_t seed = 1;
};

class HeadedModel {
 public:
  explicit HeadedModel(const HeadedModelConfig& config);

  nn::Tape::Var forward(nn::Tape& tape, std::span<const std::uint8_t> tokens, std::size_t step) const;
  nn::Matrix evaluate(std::span<const std::uint8_t> tokens, std::size_t step) const;

  const HeadedModelConfig& config() const noexcept { return config_; }
  const nn::ParameterStore& parameters() const noexcept { return params_; }
  nn::ParameterStore& parameters() noexcept { return params_; }

 private:
  HeadedModelConfig config_;
  nn::ParameterStore params_;
  SequenceEncoder encoder_;
  nn::ParamId h1_w_, h1_b_, h2_w_, h2_b_;
};

// Actor: state -> logits over byte actions, tempered by `temperature`.
struct PolicyModel {
  HeadedModel net;
  double temperature = 1.0;

  explicit PolicyModel(const HeadedModelConfig& config, double temperature = 1.0)
      : net(config), temperature(temperature) {}

  int num_actions() const noexcept { return net.config().outputs; }
  std::vector<double> logits(std::span<const std::uint8_t> obs, std::size_t step) const;
  std::vector<double> distribution(std::span<const std::uint8_t> obs, std::size_t step) const;
};

// Critic: state -> scalar value.
struct CriticModel {
  HeadedModel net;

  explicit CriticModel(const HeadedModelConfig& config) : net(config) {}
  double value(std::span<const std::uint8_t> obs, std::size_t step) const;
};

// softmax(logits / temperature); throws NonPositiveTemperature.
std::vector<double> temperature_softmax(std::span<const double> logits, double temperature);
// Inverse-CDF sampling from one 53-bit uniform draw.
int sample_action(std::span<const double> distribution, std::mt19937_64& rng);
int greedy_action(std::span<const double> distribution);
// Shannon entropy in nats.
double entropy(std::span<const double> distribution);

struct PolicyCheckpointMeta {
  std::string policy_version;
  std::size_t budget = 0;
  std::string scheme = "prepad";
};

void save_policy(const std::filesystem::path& path, const PolicyModel& policy, const CriticModel& critic,
                 const PolicyCheckpointMeta& meta);
struct LoadedPolicy {
  PolicyModel policy;
  CriticModel critic;
  PolicyCheckpointMeta meta;
};
LoadedPolicy load_policy(const std::filesystem::path& path);

// Short content hash of the policy parameters.
std::string policy_version_of(const PolicyModel& policy);

}  // namespace advpad::rl
