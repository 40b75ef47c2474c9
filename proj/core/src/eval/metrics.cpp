#include "advpad/eval/metrics.hpp"

#include <algorithm>
#include <chrono>

#include "advpad/error.hpp"
#include "advpad/eval/parallel.hpp"

namespace advpad::eval {

double acc_from_labels(std::span<const int> clean, std::span<const int> perturbed) {
  if (clean.size() != perturbed.size()) fail(ErrorCode::Config, "label vectors differ in length");
  if (clean.empty()) fail(ErrorCode::EmptyInput, "ACC of an empty test set");
  std::size_t flips = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) flips += clean[i] != perturbed[i];
  return 1.0 - static_cast<double>(flips) / static_cast<double>(clean.size());
}

std::vector<int> predict_labels(const classifier::Oracle& oracle, std::span<const Bytes> inputs, int jobs) {
  std::vector<int> out(inputs.size());
  parallel_for(inputs.size(), jobs, [&](std::size_t i) { out[i] = classifier::predict_label(oracle, inputs[i]); });
  return out;
}

double acc(const classifier::Oracle& oracle, std::span<const Bytes> clean, std::span<const Bytes> perturbed,
           int jobs) {
  return acc_from_labels(predict_labels(oracle, clean, jobs), predict_labels(oracle, perturbed, jobs));
}

double label_accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) fail(ErrorCode::Config, "label vectors differ in length");
  if (predicted.empty()) fail(ErrorCode::EmptyInput, "accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double bandwidth_overhead(double mean_packet_length, std::size_t pad_length) {
  if (!(mean_packet_length > 0.0)) fail(ErrorCode::Config, "mean packet length must be positive");
  return 100.0 * static_cast<double>(pad_length) / mean_packet_length;
}

double mean_packet_length(const LabeledDataset& ds, std::span<const std::size_t> indices) {
  if (indices.empty()) fail(ErrorCode::EmptyInput, "mean length of an empty set");
  double sum = 0.0;
  for (std::size_t i : indices) sum += ds.samples[i].packet.ip.total_length;
  return sum / static_cast<double>(indices.size());
}

LatencyStats measure_latency(std::span<const Bytes> packets, const std::function<void(ByteView, std::size_t)>& op,
                             std::size_t min_count) {
  if (packets.empty()) fail(ErrorCode::EmptyInput, "latency needs at least one packet");
  using clock = std::chrono::steady_clock;
  const std::size_t n = std::max(min_count, packets.size());
  double sum = 0.0, sum_sq = 0.0;
  const auto start = clock::now();
  for (std::size_t i = 0; i < n; ++i) {
    const auto t0 = clock::now();
    op(packets[i % packets.size()], i);
    const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    sum += ms;
    sum_sq += ms * ms;
  }
  LatencyStats s;
  s.count = n;
  s.total_seconds = std::chrono::duration<double>(clock::now() - start).count();
  s.mean_ms = sum / static_cast<double>(n);
  s.variance_ms2 = n > 1 ? std::max(0.0, (sum_sq - sum * sum / static_cast<double>(n)) / static_cast<double>(n - 1))
                         : 0.0;
  return s;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace advpad::eval
