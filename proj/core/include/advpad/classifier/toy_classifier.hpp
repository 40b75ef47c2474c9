#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "advpad/classifier/oracle.hpp"
#include "advpad/nn/tape.hpp"

namespace advpad::classifier {

struct Example {
  Bytes bytes;
  int label = 0;
};

struct ToyClassifierConfig {
  int num_classes = 2;
  int model_dim = 32;
  int input_length = 128;  // bytes read from the front of each input
  std::uint64_t seed = 7;
  int epochs = 4;
  int batch_size = 32;
  double learning_rate = 3e-3;
  double weight_decay = 1e-4;
  int min_samples_per_class = 50;
};

// Byte embedding -> one single-head self-attention mixing layer with a
// residual connection -> mean pool -> linear class head. It reads at most
// `input_length` leading bytes, so a prediction on a prefix equals the
// prediction on any input sharing that prefix.
class ToyClassifier final : public Oracle {
 public:
  explicit ToyClassifier(const ToyClassifierConfig& config);

  OracleCapabilities capabilities() const override { return {true, true, true}; }
  Prediction predict(ByteView bytes, Want want) const override;
  std::size_t input_length() const override {
    return static_cast<std::size_t>(config_.input_length);
  }

  const ToyClassifierConfig& config() const noexcept { return config_; }
  const nn::ParameterStore& parameters() const noexcept { return params_; }
  nn::ParameterStore& parameters() noexcept { return params_; }

  // Mean cross-entropy over `batch`; accumulates gradients when given.
  double loss(std::span<const Example* const> batch, nn::Gradients* grads) const;

  void save(const std::filesystem::path& path) const;
  static ToyClassifier load(const std::filesystem::path& path);

 private:
  struct Forward {
    nn::Tape::Var logits;
    nn::Tape::Var pooled;
  };
  Forward forward(nn::Tape& tape, ByteView bytes) const;

  ToyClassifierConfig config_;
  nn::ParameterStore params_;
  nn::ParamId byte_embedding_, qkv_w_, qkv_b_, out_w_, out_b_, head_w_, head_b_;
};

// Seeded and single-threaded: identical inputs give bit-identical weights.
// Throws DegenerateDataset with fewer than two classes or too few samples
// in any class. `on_epoch` receives (epoch, mean training loss).
ToyClassifier train_toy(std::span<const Example> train, const ToyClassifierConfig& config,
                        const std::function<void(int, double)>& on_epoch = {});

// Ground-truth accuracy of `oracle` on `examples`.
double accuracy(const Oracle& oracle, std::span<const Example> examples);

struct TruncationPoint {
  std::size_t length = 0;
  double accuracy = 0.0;
};

// Accuracy when only the first N bytes of each input reach the oracle.
std::vector<TruncationPoint> truncation_sweep(const Oracle& oracle, std::span<const Example> testset,
                                              std::span<const std::size_t> lengths);

inline constexpr std::size_t kDefaultTruncationLengths[] = {1, 2, 4, 8, 16, 32, 64, 128};

}  // namespace advpad::classifier
