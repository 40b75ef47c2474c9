#include "advpad/eval/experiments.hpp"

#include <chrono>
#include <map>
#include <random>

#include "advpad/error.hpp"
#include "advpad/eval/metrics.hpp"
#include "advpad/eval/parallel.hpp"
#include "advpad/rl/env.hpp"

namespace advpad::eval {

Defense no_defense() {
  return {"No-Defense", [](const net::ParsedPacket& p, std::size_t) { return p; }, 0};
}

Defense rand_post_pad(std::size_t length, std::uint64_t seed) {
  return {"RandPostPad",
          [length, seed](const net::ParsedPacket& p, std::size_t i) {
            return perturb::post_pad(p, perturb::random_sequence(length, mix_seed(seed, i)).bytes);
          },
          length};
}

Defense fixed_pad_defense(std::size_t target) {
  return {"FixedPad(" + std::to_string(target) + ")",
          [target](const net::ParsedPacket& p, std::size_t) {
            if (p.ip.total_length >= target) return p;
            return perturb::fixed_pad(p, target);
          },
          0};
}

Defense random_pre_pad(std::size_t length, std::uint64_t seed) {
  return {"PrePad-random",
          [length, seed](const net::ParsedPacket& p, std::size_t i) {
            return perturb::pre_pad(p, perturb::random_sequence(length, mix_seed(seed, i)).bytes).packet;
          },
          length};
}

Defense policy_defense(std::string name, const rl::PolicyModel& policy, std::size_t budget, perturb::Scheme scheme,
                       std::uint64_t seed, bool greedy) {
  return {std::move(name),
          [&policy, budget, scheme, seed, greedy](const net::ParsedPacket& p, std::size_t i) {
            std::mt19937_64 rng(mix_seed(seed, i));
            return rl::perturb_with_policy(policy, p, budget, scheme, rng, greedy).packet;
          },
          budget};
}

Defense cache_defense(const perturb::SequenceCache& cache, std::uint64_t seed) {
  return {"PrePad-cache",
          [&cache, seed](const net::ParsedPacket& p, std::size_t i) {
            std::mt19937_64 rng(mix_seed(seed, i));
            return perturb::cache_pad(p, cache, rng).packet;
          },
          cache.sequence_length()};
}

const DefenseRow* EvalReport::row(const std::string& name) const {
  for (const auto& r : rows) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

namespace {

using clock_type = std::chrono::steady_clock;

net::ParsedPacket checked(net::ParsedPacket out, const std::string& defense) {
  try {
    net::validate(net::parse_packet(net::serialize(out)));
  } catch (const Error& e) {
    fail(ErrorCode::MalformedHeader, defense + " produced a non-compliant packet: " + e.what());
  }
  return out;
}

std::vector<int> truth_labels(const LabeledDataset& ds, std::span<const std::size_t> indices) {
  std::vector<int> t;
  t.reserve(indices.size());
  for (std::size_t i : indices) t.push_back(ds.samples[i].label);
  return t;
}

}  // namespace

EvalReport eval_packet_defense(const classifier::Oracle& oracle, const LabeledDataset& ds,
                               std::span<const std::size_t> indices, std::span<const Defense> defenses,
                               std::size_t budget, int jobs) {
  if (indices.empty()) fail(ErrorCode::EmptyInput, "no packets to evaluate");
  EvalReport report;
  report.kind = "packet";
  report.budget = budget;
  report.samples = indices.size();
  std::vector<Bytes> clean(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) clean[k] = ds.samples[indices[k]].view;
  const std::vector<int> truth = truth_labels(ds, indices);
  const std::vector<int> clean_labels = predict_labels(oracle, clean, jobs);
  report.clean_accuracy = label_accuracy(clean_labels, truth);
  const double mean_len = mean_packet_length(ds, indices);

  for (const Defense& d : defenses) {
    const auto t0 = clock_type::now();
    std::vector<Bytes> views(indices.size());
    std::vector<double> added(indices.size());
    parallel_for(indices.size(), jobs, [&](std::size_t k) {
      const net::ParsedPacket& pkt = ds.samples[indices[k]].packet;
      const net::ParsedPacket out = checked(d.generate(pkt, indices[k]), d.name);
      views[k] = net::transport_view(out);
      added[k] = static_cast<double>(out.ip.total_length) - static_cast<double>(pkt.ip.total_length);
    });
    const std::vector<int> labels = predict_labels(oracle, views, jobs);
    DefenseRow row;
    row.name = d.name;
    row.acc = acc_from_labels(clean_labels, labels);
    row.label_accuracy = label_accuracy(labels, truth);
    row.count = indices.size();
    row.pad_length = d.pad_length;
    for (double a : added) row.mean_added_bytes += a / static_cast<double>(added.size());
    row.bandwidth_overhead = 100.0 * row.mean_added_bytes / mean_len;
    row.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<Burst> make_bursts(const LabeledDataset& ds, std::span<const std::size_t> indices) {
  std::vector<Burst> bursts;
  std::map<std::int64_t, std::size_t> open;  // flow id -> index of its current burst
  for (std::size_t i : indices) {
    const PacketSample& s = ds.samples[i];
    const auto it = open.find(s.flow_id);
    if (it != open.end() && bursts[it->second].direction == s.direction) {
      bursts[it->second].members.push_back(i);
      continue;
    }
    open[s.flow_id] = bursts.size();
    bursts.push_back({{i}, s.label, s.flow_id, s.direction});
  }
  return bursts;
}

Bytes burst_input(std::span<const Bytes> views, std::size_t max_length) {
  Bytes out;
  for (const Bytes& v : views) {
    out.insert(out.end(), v.begin(), v.end());
    if (max_length && out.size() >= max_length) break;
  }
  if (max_length && out.size() > max_length) out.resize(max_length);
  return out;
}

EvalReport eval_burst_defense(const classifier::Oracle& oracle, const LabeledDataset& ds,
                              std::span<const Burst> bursts, std::span<const Defense> defenses, std::size_t budget,
                              int jobs) {
  if (bursts.empty()) fail(ErrorCode::EmptyInput, "no bursts to evaluate");
  EvalReport report;
  report.kind = "burst";
  report.budget = budget;
  report.samples = bursts.size();
  const std::size_t limit = oracle.input_length();

  std::vector<Bytes> clean(bursts.size());
  std::vector<int> truth;
  double clean_bytes = 0.0;
  for (std::size_t b = 0; b < bursts.size(); ++b) {
    std::vector<Bytes> views;
    for (std::size_t i : bursts[b].members) {
      views.push_back(ds.samples[i].view);
      clean_bytes += ds.samples[i].packet.ip.total_length;
    }
    clean[b] = burst_input(views, limit);
    truth.push_back(bursts[b].label);
  }
  const std::vector<int> clean_labels = predict_labels(oracle, clean, jobs);
  report.clean_accuracy = label_accuracy(clean_labels, truth);

  for (const Defense& d : defenses) {
    const auto t0 = clock_type::now();
    std::vector<Bytes> inputs(bursts.size());
    std::vector<double> added(bursts.size());
    parallel_for(bursts.size(), jobs, [&](std::size_t b) {
      std::vector<Bytes> views;
      for (std::size_t i : bursts[b].members) {
        const net::ParsedPacket& pkt = ds.samples[i].packet;
        const net::ParsedPacket out = checked(d.generate(pkt, i), d.name);
        views.push_back(net::transport_view(out));
        added[b] += static_cast<double>(out.ip.total_length) - static_cast<double>(pkt.ip.total_length);
      }
      inputs[b] = burst_input(views, limit);
    });
    const std::vector<int> labels = predict_labels(oracle, inputs, jobs);
    DefenseRow row;
    row.name = d.name;
    row.acc = acc_from_labels(clean_labels, labels);
    row.label_accuracy = label_accuracy(labels, truth);
    row.count = bursts.size();
    row.pad_length = d.pad_length;
    double total_added = 0.0;
    for (double a : added) total_added += a;
    row.mean_added_bytes = total_added / static_cast<double>(bursts.size());
    row.bandwidth_overhead = 100.0 * total_added / clean_bytes;
    row.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<SweepPoint> sweep_padding_length(const classifier::Oracle& oracle, const LabeledDataset& ds,
                                             std::span<const std::size_t> indices,
                                             std::span<const std::size_t> lengths,
                                             const std::function<Defense(std::size_t)>& make, int jobs) {
  std::vector<SweepPoint> out;
  for (std::size_t len : lengths) {
    const Defense d = make(len);
    const EvalReport r = eval_packet_defense(oracle, ds, indices, std::span(&d, 1), len, jobs);
    out.push_back({static_cast<double>(len), r.rows[0].acc, r.rows[0].label_accuracy, 0.0});
  }
  return out;
}

double mean_initial_entropy(const rl::PolicyModel& policy, std::span<const net::ParsedPacket> packets,
                            perturb::Scheme scheme, std::size_t budget) {
  if (packets.empty() || budget == 0) return 0.0;
  double sum = 0.0;
  for (const auto& p : packets) {
    const rl::EnvState s = rl::env_reset(p, budget, scheme);
    sum += rl::entropy(policy.distribution(rl::policy_observation(s, policy.net.config().encoder), s.step));
  }
  return sum / static_cast<double>(packets.size());
}

std::vector<SweepPoint> sweep_temperature(const classifier::Oracle& oracle, const LabeledDataset& ds,
                                          std::span<const std::size_t> indices, const rl::PolicyModel& policy,
                                          std::span<const double> temperatures, std::size_t budget,
                                          std::uint64_t seed, int jobs) {
  const std::vector<net::ParsedPacket> packets = ds.packets(indices);
  std::vector<SweepPoint> out;
  for (double tau : temperatures) {
    rl::PolicyModel tempered = policy;
    tempered.temperature = tau;
    const Defense d = policy_defense("PrePad-policy", tempered, budget, perturb::Scheme::PrePad, seed);
    const EvalReport r = eval_packet_defense(oracle, ds, indices, std::span(&d, 1), budget, jobs);
    out.push_back({tau, r.rows[0].acc, r.rows[0].label_accuracy,
                   mean_initial_entropy(tempered, packets, perturb::Scheme::PrePad, budget)});
  }
  return out;
}

std::vector<SweepPoint> sweep_entropy_alpha(const classifier::Oracle& oracle, const LabeledDataset& ds,
                                            std::span<const std::size_t> train_indices,
                                            std::span<const std::size_t> indices, const rl::TrainConfig& base,
                                            std::span<const double> alphas, int jobs) {
  const std::vector<net::ParsedPacket> train_packets = ds.packets(train_indices);
  const std::vector<net::ParsedPacket> packets = ds.packets(indices);
  std::vector<SweepPoint> out;
  for (double alpha : alphas) {
    rl::TrainConfig cfg = base;
    cfg.alpha = alpha;
    const rl::TrainResult trained = rl::train(train_packets, oracle, cfg);
    const Defense d = policy_defense("PrePad-policy", trained.policy, cfg.budget, cfg.scheme, cfg.seed);
    const EvalReport r = eval_packet_defense(oracle, ds, indices, std::span(&d, 1), cfg.budget, jobs);
    out.push_back({alpha, r.rows[0].acc, r.rows[0].label_accuracy,
                   mean_initial_entropy(trained.policy, packets, cfg.scheme, cfg.budget)});
  }
  return out;
}

}  // namespace advpad::eval
