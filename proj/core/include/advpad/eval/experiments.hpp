#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "advpad/classifier/oracle.hpp"
#include "advpad/eval/dataset.hpp"
#include "advpad/perturb/cache.hpp"
#include "advpad/rl/policy.hpp"
#include "advpad/rl/train.hpp"

namespace advpad::eval {

// Maps a clean packet (and its position in the evaluated set) to the packet
// that goes on the wire.
using PacketGenerator = std::function<net::ParsedPacket(const net::ParsedPacket&, std::size_t index)>;

struct Defense {
  std::string name;
  PacketGenerator generate;
  std::size_t pad_length = 0;  // nominal perturbation bytes per packet
};

Defense no_defense();
Defense rand_post_pad(std::size_t length, std::uint64_t seed);
// Zero-fill to `target` bytes; packets already that long pass unchanged.
Defense fixed_pad_defense(std::size_t target = 1500);
Defense random_pre_pad(std::size_t length, std::uint64_t seed);
// Rolls out `policy` per packet with the given scheme. The policy must
// outlive the returned Defense.
Defense policy_defense(std::string name, const rl::PolicyModel& policy, std::size_t budget, perturb::Scheme scheme,
                       std::uint64_t seed, bool greedy = false);
Defense cache_defense(const perturb::SequenceCache& cache, std::uint64_t seed);

struct DefenseRow {
  std::string name;
  double acc = 1.0;             // flip-based ACC against clean predictions
  double label_accuracy = 0.0;  // ground-truth accuracy under this defense
  std::size_t count = 0;
  std::size_t pad_length = 0;
  double mean_added_bytes = 0.0;
  double bandwidth_overhead = 0.0;  // percent of mean clean packet length
  double seconds = 0.0;
};

struct EvalReport {
  std::string kind;  // "packet" or "burst"
  std::size_t budget = 0;
  std::size_t samples = 0;
  double clean_accuracy = 0.0;
  std::vector<DefenseRow> rows;
  std::string config_json = "{}";

  const DefenseRow* row(const std::string& name) const;
};

// Every generated packet is re-parsed and validated (lengths and both
// checksums); a failure throws MalformedHeader.
EvalReport eval_packet_defense(const classifier::Oracle& oracle, const LabeledDataset& ds,
                               std::span<const std::size_t> indices, std::span<const Defense> defenses,
                               std::size_t budget, int jobs = 1);

struct Burst {
  std::vector<std::size_t> members;  // dataset indices, in order
  int label = 0;
  std::int64_t flow_id = 0;
  int direction = 0;
};

// Maximal runs of consecutive same-direction packets of one flow, taken over
// `indices` in the given order.
std::vector<Burst> make_bursts(const LabeledDataset& ds, std::span<const std::size_t> indices);
// Concatenated member views truncated to `max_length` (0: no limit).
Bytes burst_input(std::span<const Bytes> views, std::size_t max_length);

// Each member packet is perturbed independently; the oracle classifies the
// concatenated burst.
EvalReport eval_burst_defense(const classifier::Oracle& oracle, const LabeledDataset& ds,
                              std::span<const Burst> bursts, std::span<const Defense> defenses, std::size_t budget,
                              int jobs = 1);

struct SweepPoint {
  double x = 0.0;
  double acc = 1.0;
  double label_accuracy = 0.0;
  double mean_entropy = 0.0;  // policy sweeps only
};

// One ACC per padding length; `make` builds the defense for a length.
std::vector<SweepPoint> sweep_padding_length(const classifier::Oracle& oracle, const LabeledDataset& ds,
                                             std::span<const std::size_t> indices,
                                             std::span<const std::size_t> lengths,
                                             const std::function<Defense(std::size_t)>& make, int jobs = 1);
// Re-rolls a fixed policy at each temperature. mean_entropy is measured on
// the initial states of the evaluated packets.
std::vector<SweepPoint> sweep_temperature(const classifier::Oracle& oracle, const LabeledDataset& ds,
                                          std::span<const std::size_t> indices, const rl::PolicyModel& policy,
                                          std::span<const double> temperatures, std::size_t budget,
                                          std::uint64_t seed, int jobs = 1);
// Retrains a policy per alpha on `train_indices` and evaluates it.
std::vector<SweepPoint> sweep_entropy_alpha(const classifier::Oracle& oracle, const LabeledDataset& ds,
                                            std::span<const std::size_t> train_indices,
                                            std::span<const std::size_t> indices, const rl::TrainConfig& base,
                                            std::span<const double> alphas, int jobs = 1);

// Mean Shannon entropy of the policy on the initial state of each packet.
double mean_initial_entropy(const rl::PolicyModel& policy, std::span<const net::ParsedPacket> packets,
                            perturb::Scheme scheme, std::size_t budget);

inline constexpr std::size_t kSweepPaddingLengths[] = {1, 2, 4, 8, 16, 32};
inline constexpr double kSweepAlphas[] = {0.1, 0.5, 1.0, 1.5};
inline constexpr double kSweepTemperatures[] = {1, 2, 4, 6, 8, 10};

}  // namespace advpad::eval
