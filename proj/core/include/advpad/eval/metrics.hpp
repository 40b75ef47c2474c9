#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "advpad/classifier/oracle.hpp"
#include "advpad/eval/dataset.hpp"

namespace advpad::eval {

// 1 - |{x : f(G(x)) != f(x)}| / |X|, from labels predicted on clean and
// perturbed inputs. Throws EmptyInput for an empty set.
double acc_from_labels(std::span<const int> clean, std::span<const int> perturbed);
double acc(const classifier::Oracle& oracle, std::span<const Bytes> clean, std::span<const Bytes> perturbed,
           int jobs = 1);

std::vector<int> predict_labels(const classifier::Oracle& oracle, std::span<const Bytes> inputs, int jobs = 1);
// Fraction of predictions equal to the ground-truth labels.
double label_accuracy(std::span<const int> predicted, std::span<const int> truth);

// Padding bytes as a percentage of the mean packet length.
double bandwidth_overhead(double mean_packet_length, std::size_t pad_length);
// Mean IP total length over `indices`.
double mean_packet_length(const LabeledDataset& ds, std::span<const std::size_t> indices);

struct LatencyStats {
  std::size_t count = 0;
  double mean_ms = 0.0;
  double variance_ms2 = 0.0;
  double total_seconds = 0.0;
};

// Times op(packet, index) once per packet, cycling over `packets` until at
// least `min_count` calls have been made.
LatencyStats measure_latency(std::span<const Bytes> packets,
                             const std::function<void(ByteView, std::size_t)>& op, std::size_t min_count = 10000);

// splitmix64 of (seed, index), for per-sample RNG streams that do not
// depend on evaluation order.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace advpad::eval
