// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "advpad/classifier/toy_classifier.hpp"
#include "advpad/eval/experiments.hpp"
#include "advpad/eval/metrics.hpp"
#include "advpad/eval/synthetic.hpp"
#include "advpad/net/checksum.hpp"
#include "advpad/perturb/perturb.hpp"
#include "advpad/rl/train.hpp"
#include "fixtures.hpp"
#include "gradcheck.hpp"

using namespace advpad;
using clock_type = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

void reversibility() {
  const auto t0 = clock_type::now();
  std::mt19937_64 rng(101);
  const std::size_t budgets[] = {1, 2, 4, 8, 16, 32};
  std::size_t ok = 0;
  const std::size_t n = 10000;
  for (std::size_t i = 0; i < n; ++i) {
    const net::ParsedPacket p = fixture::random_packet(rng, 1200);
    const Bytes adv = fixture::random_bytes(rng, budgets[rng() % 6]);
    const auto out = perturb::pre_pad(p, adv);
    const net::ParsedPacket wire = net::parse_packet(net::serialize(out.packet));
    const bool verifies = net::verify_ip_checksum(wire) == 0 && net::verify_transport_checksum(wire) == 0;
    const bool restored =
        net::serialize(perturb::de_perturb(wire, out.record)) == net::serialize(net::finalize(p));
    ok += verifies && restored;
  }
  const double secs = seconds_since(t0);
  report(ok == n && secs < 120.0, "reversibility_and_compliance",
         fmt("%zu/%zu packets restored byte-exactly with verifying checksums in %.1fs (need 100%%, < 120s)", ok, n,
             secs));
}

void env_equivalence() {
  std::mt19937_64 rng(202);
  std::size_t ok = 0;
  const std::size_t n = 1000;
  for (std::size_t i = 0; i < n; ++i) {
    const net::ParsedPacket p = fixture::random_packet(rng, 600);
    const Bytes actions = fixture::random_bytes(rng, 1 + rng() % 48);
    rl::EnvState s = rl::env_reset(p, actions.size(), perturb::Scheme::PrePad);
    for (std::uint8_t a : actions) s = rl::env_step(s, a).next;
    ok += net::serialize(s.working) == net::serialize(perturb::pre_pad(p, actions).packet);
  }
  report(ok == n, "env_engine_equivalence", fmt("%zu/%zu rollouts equal pre_pad byte-exactly (need 100%%)", ok, n));
}

void gradient_checks() {
  std::size_t ok = 0;
  double worst = 0.0;
  std::size_t params = 0;
  const std::size_t n = 50;
  for (std::size_t i = 0; i < n; ++i) {
    const auto form = i % 2 ? rl::EntropyForm::Sampled : rl::EntropyForm::Full;
    const auto r = fixture::gradient_check_point(1000 + i, form);
    params = std::max({params, r.actor_params, r.critic_params});
    worst = std::max({worst, r.actor_rel_error, r.critic_rel_error});
    ok += r.actor_rel_error < 1e-4 && r.critic_rel_error < 1e-4 && r.actor_params <= 200 && r.critic_params <= 200;
  }
  report(ok == n, "gradient_checks",
         fmt("%zu/%zu points, worst relative error %.2e, largest net %zu params (need < 1e-4, <= 200)", ok, n, worst,
             params));
}

void softmax_properties() {
  bool fixpoint = true;
  const std::vector<double> flat(256, -1.25);
  for (double tau : {0.5, 1.0, 2.0, 10.0}) {
    for (double p : rl::temperature_softmax(flat, tau)) fixpoint &= p == 1.0 / 256.0;
  }
  std::mt19937_64 rng(303);
  std::normal_distribution<double> nd(0.0, 1.5);
  std::size_t monotone = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> z(256);
    for (double& v : z) v = nd(rng);
    double prev = -1.0;
    bool inc = true;
    for (double tau : {0.5, 1.0, 2.0, 10.0}) {
      const double h = rl::entropy(rl::temperature_softmax(z, tau));
      inc &= h > prev;
      prev = h;
    }
    monotone += inc;
  }
  const auto p = rl::temperature_softmax(std::vector<double>{2.0, 0.0}, 1.0);
  const double e2 = std::exp(2.0);
  const double err = std::max(std::abs(p[0] - e2 / (e2 + 1.0)), std::abs(p[1] - 1.0 / (e2 + 1.0)));
  report(fixpoint && monotone == 100 && err <= 1e-12, "softmax_entropy_properties",
         fmt("uniform fixpoint %s, entropy increasing for %zu/100 logit vectors, 2-action error %.1e (need 1e-12)",
             fixpoint ? "exact" : "broken", monotone, err));
}

// Flips its label iff the first byte inserted before the TCP payload is 0x41.
class RiggedOracle final : public classifier::Oracle {
 public:
  classifier::OracleCapabilities capabilities() const override { return {true, false, false}; }
  classifier::Prediction predict(ByteView bytes, classifier::Want want) const override {
    classifier::require_capabilities(capabilities(), want);
    classifier::Prediction p;
    p.label = bytes.size() > kPayloadOffset && bytes[kPayloadOffset] == 0x41 ? 1 : 0;
    return p;
  }
  static constexpr std::size_t kPayloadOffset = 16;  // view offset of the first TCP payload byte
};

void rigged_convergence() {
  const auto t0 = clock_type::now();
  std::mt19937_64 rng(404);
  std::vector<net::ParsedPacket> packets;
  for (int i = 0; i < 200; ++i) {
    Bytes payload = fixture::random_bytes(rng, 20 + rng() % 60);
    if (payload[0] == 0x41) payload[0] = 0x42;
    packets.push_back(net::make_tcp_packet(fixture::random_endpoints(rng), static_cast<std::uint32_t>(rng()),
                                           static_cast<std::uint32_t>(rng()), static_cast<std::uint16_t>(rng()), 0,
                                           payload));
  }
  rl::TrainConfig c;
  c.reward_mode = rl::RewardMode::BlackBox;
  c.budget = perturb::kHeaderFieldBytes + 1;  // the last step is the first payload insertion
  c.discount = 0.0;
  c.clip_enabled = false;
  c.alpha = 0.0;
  c.actor_lr = 3e-3;
  c.critic_lr = 1e-3;
  c.max_episodes = 2000;
  c.seed = 5;
  c.encoder = {256, 32, 2, 1, 64, 64, 32};
  c.head_hidden = 64;
  const RiggedOracle oracle;
  const auto result = rl::train(packets, oracle, c);
  const double secs = seconds_since(t0);

  // P(0x41) at the insertion step, with the header steps sampled from the policy.
  std::mt19937_64 eval_rng(7);
  double prob = 0.0;
  const std::size_t n = 100;
  for (std::size_t i = 0; i < n; ++i) {
    rl::EnvState s = rl::env_reset(packets[i], c.budget, c.scheme);
    while (s.step < c.budget) {
      const auto d = result.policy.distribution(rl::policy_observation(s, c.encoder), s.step);
      s = rl::env_step(s, static_cast<std::uint8_t>(rl::sample_action(d, eval_rng))).next;
    }
    prob += result.policy.distribution(rl::policy_observation(s, c.encoder), s.step)[0x41];
  }
  prob /= static_cast<double>(n);
  report(prob >= 0.9 && result.episodes <= 2000 && secs <= 600.0, "rigged_oracle_convergence",
         fmt("P(0x41 at first payload step) = %.4f after %zu episodes in %.1fs (need >= 0.9, <= 2000, <= 600s)", prob,
             result.episodes, secs));
}

void acc_units() {
  const std::vector<int> clean = {0, 1, 2, 3, 4, 0, 1, 2, 3, 4};
  std::vector<int> flipped = clean, half = clean;
  for (int& l : flipped) l = (l + 1) % 5;
  for (std::size_t i = 0; i < 5; ++i) half[i] = (half[i] + 1) % 5;
  const double a = eval::acc_from_labels(clean, clean);
  const double b = eval::acc_from_labels(clean, flipped);
  const double c = eval::acc_from_labels(clean, half);
  report(a == 1.0 && b == 0.0 && c == 0.5, "acc_metric_units",
         fmt("identity %.17g, total flip %.17g, half flip %.17g (need exactly 1, 0, 0.5)", a, b, c));
}

void bandwidth() {
  const double vpn = eval::bandwidth_overhead(1106, 32);
  const double tor = eval::bandwidth_overhead(994, 32);
  const double third = eval::bandwidth_overhead(919, 32);
  const bool ok = std::abs(vpn - 2.9) <= 0.1 && std::abs(tor - 3.2) <= 0.1 && std::abs(third - 3.4) <= 0.1;
  report(ok, "bandwidth_arithmetic",
         fmt("pad 32 over 1106/994/919 bytes = %.3f%%/%.3f%%/%.3f%% (need 2.9/3.2/3.4 +- 0.1)", vpn, tor, third));
}

void synthetic_suite(clock_type::time_point t_start) {
  const auto t0 = clock_type::now();
  const auto synth = eval::synthesize({});
  const auto ds = eval::preprocess(synth.frames, synth.class_names, 7);
  classifier::ToyClassifierConfig cc;
  cc.num_classes = ds.num_classes();
  const auto clf = classifier::train_toy(ds.examples(ds.splits.train), cc);
  const auto test_examples = ds.examples(ds.splits.test);
  std::printf("  classifier trained on %zu packets in %.1fs\n", ds.splits.train.size(), seconds_since(t0));

  const auto trunc = classifier::truncation_sweep(clf, test_examples, classifier::kDefaultTruncationLengths);
  double acc4 = 0, acc32 = 0, acc128 = 0;
  for (const auto& p : trunc) {
    std::printf("  truncation %4zu bytes: accuracy %.4f\n", p.length, p.accuracy);
    if (p.length == 4) acc4 = p.accuracy;
    if (p.length == 32) acc32 = p.accuracy;
    if (p.length == 128) acc128 = p.accuracy;
  }
  report(std::abs(acc32 - acc128) <= 0.02 && acc4 <= acc32 - 0.10, "truncation_plateau",
         fmt("acc(4)=%.4f acc(32)=%.4f acc(128)=%.4f (need |acc32-acc128| <= 0.02, acc4 <= acc32 - 0.10)", acc4,
             acc32, acc128));

  const auto t_rl = clock_type::now();
  rl::TrainConfig tc;
  tc.reward_mode = rl::RewardMode::WhiteBox;
  tc.budget = 32;
  tc.actor_lr = 1e-3;
  tc.critic_lr = 1e-3;
  tc.alpha = 0.01;
  tc.max_episodes = 2000;
  tc.encoder = {256, 32, 2, 1, 64, 64, 32};
  tc.head_hidden = 64;
  const auto train_packets = ds.packets(ds.splits.train);
  const auto trained = rl::train(train_packets, clf, tc);
  std::printf("  policy trained for %zu episodes in %.1fs\n", trained.episodes, seconds_since(t_rl));

  std::vector<net::ParsedPacket> cache_samples(train_packets.begin(), train_packets.begin() + 256);
  const auto cache = rl::build_cache(trained.policy, cache_samples, 256, tc.budget, 11);
  const std::vector<eval::Defense> defenses = {
      eval::no_defense(),
      eval::rand_post_pad(tc.budget, 21),
      eval::random_pre_pad(tc.budget, 22),
      eval::policy_defense("PrePad-policy", trained.policy, tc.budget, perturb::Scheme::PrePad, 23),
      eval::cache_defense(cache, 24),
  };
  const auto rep = eval::eval_packet_defense(clf, ds, ds.splits.test, defenses, tc.budget, jobs());
  for (const auto& r : rep.rows) {
    std::printf("  %-14s accuracy %.4f  flip-ACC %.4f  +%.1f bytes (%.2f%%)\n", r.name.c_str(), r.label_accuracy,
                r.acc, r.mean_added_bytes, r.bandwidth_overhead);
  }
  const double clean = rep.clean_accuracy;
  const double post = rep.row("RandPostPad")->label_accuracy;
  const double random = rep.row("PrePad-random")->label_accuracy;
  const double policy = rep.row("PrePad-policy")->label_accuracy;
  const double cached = rep.row("PrePad-cache")->label_accuracy;
  const double total = seconds_since(t_start);
  report(clean >= 0.95 && post >= clean - 0.05 && policy <= 0.60 && random >= policy && total <= 45 * 60,
         "synthetic_directional_gap",
         fmt("clean %.4f, RandPostPad %.4f, PrePad-random %.4f, PrePad-policy %.4f, %.0fs elapsed "
             "(need clean >= 0.95, post >= clean-0.05, policy <= 0.60, random >= policy, <= 2700s)",
             clean, post, random, policy, total));

  std::vector<Bytes> wire;
  for (std::size_t i : ds.splits.test) wire.push_back(net::serialize(ds.samples[i].packet));
  std::mt19937_64 rng(31);
  const auto lat = eval::measure_latency(wire, [&](ByteView raw, std::size_t) {
    const auto out = perturb::cache_pad(net::parse_packet(raw), cache, rng);
    volatile std::size_t sink = net::serialize(out.packet).size();
    (void)sink;
  });
  report(std::abs(cached - policy) <= 0.10 && lat.mean_ms < 1.0, "cache_fidelity_and_latency",
         fmt("cache %.4f vs rollout %.4f (gap %.4f), cache_pad %.4f ms/packet over %zu packets "
             "(need gap <= 0.10, < 1 ms)",
             cached, policy, std::abs(cached - policy), lat.mean_ms, lat.count));
}

}  // namespace

int main() {
  const auto t0 = clock_type::now();
  const std::pair<const char*, void (*)()> quick[] = {
      {"reversibility", reversibility}, {"env", env_equivalence},  {"gradients", gradient_checks},
      {"softmax", softmax_properties},  {"acc", acc_units},        {"bandwidth", bandwidth},
  };
  for (const auto& [name, fn] : quick) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(false, name, std::string("threw: ") + e.what());
    }
  }
  try {
    rigged_convergence();
  } catch (const std::exception& e) {
    report(false, "rigged_oracle_convergence", std::string("threw: ") + e.what());
  }
  try {
    synthetic_suite(clock_type::now());
  } catch (const std::exception& e) {
    report(false, "synthetic_suite", std::string("threw: ") + e.what());
  }
  std::printf("%d criteria failed, %.1fs total\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
