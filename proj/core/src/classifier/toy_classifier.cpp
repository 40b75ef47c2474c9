#include "advpad/classifier/toy_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "advpad/error.hpp"
#include "advpad/nn/checkpoint.hpp"
#include "json.hpp"

namespace advpad::classifier {

using nn::Matrix;

ToyClassifier::ToyClassifier(const ToyClassifierConfig& config) : config_(config) {
  if (config_.num_classes < 2) fail(ErrorCode::DegenerateDataset, "need at least two classes");
  std::mt19937_64 rng(config_.seed);
  const int d = config_.model_dim;
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  byte_embedding_ = params_.add("byte_embedding", nn::random_normal(256, d, 1.0, rng));
  qkv_w_ = params_.add("attn.qkv.weight", nn::random_normal(d, 3 * d, s, rng));
  qkv_b_ = params_.add("attn.qkv.bias", Matrix::Zero(1, 3 * d));
  out_w_ = params_.add("attn.out.weight", nn::random_normal(d, d, 0.5 * s, rng));
  out_b_ = params_.add("attn.out.bias", Matrix::Zero(1, d));
  head_w_ = params_.add("head.weight", nn::random_normal(d, config_.num_classes, s, rng));
  head_b_ = params_.add("head.bias", Matrix::Zero(1, config_.num_classes));
}

ToyClassifier::Forward ToyClassifier::forward(nn::Tape& tape, ByteView bytes) const {
  const std::size_t n = std::min(bytes.size(), static_cast<std::size_t>(config_.input_length));
  std::vector<int> ids(bytes.begin(), bytes.begin() + static_cast<long>(n));
  const auto x = tape.embed(byte_embedding_, ids);
  const auto qkv = tape.linear(x, qkv_w_, qkv_b_);
  const auto mixed = tape.linear(tape.attention(qkv, 1), out_w_, out_b_);
  const auto pooled = tape.mean_rows(tape.add(x, mixed));
  return {tape.linear(pooled, head_w_, head_b_), pooled};
}

namespace {

std::vector<double> softmax(const Matrix& logits) {
  std::vector<double> p(static_cast<std::size_t>(logits.cols()));
  const double mx = logits.maxCoeff();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits(0, static_cast<int>(i)) - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

}  // namespace

Prediction ToyClassifier::predict(ByteView bytes, Want want) const {
  if (bytes.empty()) fail(ErrorCode::EmptyInput, "cannot classify an empty byte sequence");
  nn::Tape tape(params_);
  const Forward f = forward(tape, bytes);
  std::vector<double> dist = softmax(tape.value(f.logits));
  Prediction p;
  p.label = argmax(dist);
  if (want.distribution) p.distribution = std::move(dist);
  if (want.embedding) {
    const Matrix& e = tape.value(f.pooled);
    p.embedding = std::vector<double>(e.data(), e.data() + e.size());
  }
  return p;
}

double ToyClassifier::loss(std::span<const Example* const> batch, nn::Gradients* grads) const {
  double total = 0.0;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const Example* ex : batch) {
    nn::Tape tape(params_, grads);
    const Forward f = forward(tape, ex->bytes);
    const std::vector<double> p = softmax(tape.value(f.logits));
    total -= std::log(std::max(p[static_cast<std::size_t>(ex->label)], 1e-300));
    if (grads) {
      Matrix seed(1, static_cast<int>(p.size()));
      for (std::size_t c = 0; c < p.size(); ++c) {
        seed(0, static_cast<int>(c)) = (p[c] - (static_cast<int>(c) == ex->label ? 1.0 : 0.0)) * inv;
      }
      tape.backward(f.logits, seed);
    }
  }
  return total * inv;
}

void ToyClassifier::save(const std::filesystem::path& path) const {
  nlohmann::json meta;
  meta["model"] = "toy_classifier";
  meta["num_classes"] = config_.num_classes;
  meta["model_dim"] = config_.model_dim;
  meta["input_length"] = config_.input_length;
  meta["seed"] = config_.seed;
  nn::Checkpoint ckpt;
  ckpt.meta_json = meta.dump();
  ckpt.sections.push_back({"classifier", params_});
  nn::save_checkpoint(path, ckpt);
}

ToyClassifier ToyClassifier::load(const std::filesystem::path& path) {
  const nn::Checkpoint ckpt = nn::load_checkpoint(path);
  ToyClassifierConfig config;
  try {
    const auto meta = nlohmann::json::parse(ckpt.meta_json);
    if (meta.at("model").get<std::string>() != "toy_classifier") {
      fail(ErrorCode::Config, "checkpoint does not hold a toy classifier");
    }
    config.num_classes = meta.at("num_classes").get<int>();
    config.model_dim = meta.at("model_dim").get<int>();
    config.input_length = meta.at("input_length").get<int>();
    config.seed = meta.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Config, std::string("bad classifier metadata: ") + e.what());
  }
  ToyClassifier model(config);
  nn::load_parameters(model.params_, ckpt.section("classifier"));
  return model;
}

ToyClassifier train_toy(std::span<const Example> train, const ToyClassifierConfig& config,
                        const std::function<void(int, double)>& on_epoch) {
  std::map<int, int> per_class;
  for (const Example& ex : train) ++per_class[ex.label];
  if (per_class.size() < 2) fail(ErrorCode::DegenerateDataset, "training data has fewer than two classes");
  for (const auto& [label, count] : per_class) {
    if (label < 0 || label >= config.num_classes) {
      fail(ErrorCode::DegenerateDataset, "label " + std::to_string(label) + " outside 0..C-1");
    }
    if (count < config.min_samples_per_class) {
      fail(ErrorCode::DegenerateDataset, "class " + std::to_string(label) + " has only " +
                                             std::to_string(count) + " samples");
    }
  }
  for (const Example& ex : train) {
    if (ex.bytes.empty()) fail(ErrorCode::EmptyInput, "training example with no bytes");
  }

  ToyClassifier model(config);
  nn::AdamW optimizer(model.parameters(), {config.learning_rate, 0.9, 0.999, 1e-8, config.weight_decay});
  nn::Gradients grads(model.parameters());
  std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<const Example*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train[order[i]]);
      grads.zero();
      const double l = model.loss(batch, &grads);
      if (!std::isfinite(l) || !grads.all_finite()) {
        fail(ErrorCode::NaNLoss, "classifier loss diverged in epoch " + std::to_string(epoch));
      }
      nn::clip_global_norm(grads, 5.0);
      optimizer.step(model.parameters(), grads);
      epoch_loss += l;
      ++batches;
    }
    if (on_epoch) on_epoch(epoch, epoch_loss / static_cast<double>(std::max<std::size_t>(batches, 1)));
  }
  return model;
}

double accuracy(const Oracle& oracle, std::span<const Example> examples) {
  if (examples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const Example& ex : examples) {
    if (predict_label(oracle, ex.bytes) == ex.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

std::vector<TruncationPoint> truncation_sweep(const Oracle& oracle, std::span<const Example> testset,
                                              std::span<const std::size_t> lengths) {
  std::vector<TruncationPoint> out;
  for (std::size_t n : lengths) {
    std::size_t correct = 0;
    for (const Example& ex : testset) {
      const ByteView prefix = ByteView(ex.bytes).first(std::min(n, ex.bytes.size()));
      if (!prefix.empty() && predict_label(oracle, prefix) == ex.label) ++correct;
    }
    out.push_back({n, testset.empty() ? 0.0
                                      : static_cast<double>(correct) /
                                            static_cast<double>(testset.size())});
  }
  return out;
}

}  // namespace advpad::classifier
