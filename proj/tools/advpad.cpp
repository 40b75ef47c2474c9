// advpad: command-line front end for the pre-padding pipeline.
#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "advpad/classifier/remote.hpp"
#include "advpad/classifier/toy_classifier.hpp"
#include "advpad/error.hpp"
#include "advpad/eval/dataset.hpp"
#include "advpad/eval/experiments.hpp"
#include "advpad/eval/metrics.hpp"
#include "advpad/eval/report.hpp"
#include "advpad/eval/synthetic.hpp"
#include "advpad/net/pcap.hpp"
#include "advpad/nn/checkpoint.hpp"
#include "advpad/perturb/cache.hpp"
#include "advpad/perturb/perturb.hpp"
#include "advpad/perturb/sidecar.hpp"
#include "advpad/rl/policy.hpp"
#include "advpad/rl/train.hpp"

// After Eigen: <resolv.h> defines a _res macro that collides with it.
#include <httplib.h>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace advpad;

namespace {

struct Common {
  std::uint64_t seed = 1;
  std::string config;
  std::string scheme = "prepad";
  std::size_t budget = 32;
  std::string oracle;
  int jobs = 0;
  std::string out = ".";
};

struct Manifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string checkpoint;
};

int job_count(const Common& c) {
  return c.jobs > 0 ? c.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

fs::path out_dir(const Common& c) {
  fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void require_file(const std::string& path, ErrorCode code, const std::string& what) {
  if (path.empty()) fail(ErrorCode::Usage, what + " path is required");
  if (!fs::is_regular_file(path)) fail(code, what + " not found: " + path);
}

std::string read_text(const std::string& path) {
  const Bytes b = net::read_file(path);
  return std::string(b.begin(), b.end());
}

void write_manifest(const Common& c, const Manifest& m) {
  json j;
  j["command"] = m.command;
  j["config"] = c.config;
  j["seed"] = c.seed;
  j["scheme"] = c.scheme;
  j["budget"] = c.budget;
  j["oracle"] = c.oracle;
  json inputs = json::array();
  for (const auto& in : m.inputs) {
    if (!in.empty()) inputs.push_back(in);
  }
  j["inputs"] = inputs;
  j["outputs"] = m.outputs;
  if (!m.checkpoint.empty()) {
    j["checkpoint"] = m.checkpoint;
    j["checkpoint_hash"] = nn::git_blob_hash(net::read_file(m.checkpoint));
  }
  j["created_unix"] = std::chrono::duration_cast<std::chrono::seconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count();
  eval::write_text(out_dir(c) / "manifest.json", j.dump(2) + "\n");
}

std::unique_ptr<classifier::Oracle> open_oracle(const Common& c) {
  std::string spec = c.oracle;
  if (spec.empty()) {
    const char* env = std::getenv("ADVPAD_ORACLE_URL");
    if (env == nullptr || *env == '\0') fail(ErrorCode::Usage, "--oracle is required (or set ADVPAD_ORACLE_URL)");
    spec = std::string("remote:") + env;
  }
  if (spec.rfind("toy:", 0) == 0) {
    const std::string path = spec.substr(4);
    require_file(path, ErrorCode::Config, "classifier checkpoint");
    return std::make_unique<classifier::ToyClassifier>(classifier::ToyClassifier::load(path));
  }
  if (spec.rfind("remote:", 0) == 0) {
    return std::make_unique<classifier::RemoteOracle>(spec.substr(7), classifier::OracleCapabilities{true, true, true});
  }
  fail(ErrorCode::Usage, "oracle must be toy:PATH or remote:URL, got " + spec);
}

rl::LoadedPolicy open_policy(const std::string& path) {
  require_file(path, ErrorCode::Config, "policy checkpoint");
  return rl::load_policy(path);
}

eval::LabeledDataset open_dataset(const std::string& path) {
  require_file(path, ErrorCode::Io, "dataset");
  return eval::load_dataset(path);
}

const std::vector<std::size_t>& split_of(const eval::LabeledDataset& ds, const std::string& name) {
  if (name == "train") return ds.splits.train;
  if (name == "val") return ds.splits.val;
  if (name == "test") return ds.splits.test;
  fail(ErrorCode::Usage, "split must be train, val or test, got " + name);
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  int classes = 5;
  int per_class = 2000;
  int noise = 0;
};

void cmd_synth(const Common& c, const SynthArgs& a) {
  eval::SyntheticConfig sc;
  sc.classes = a.classes;
  sc.packets_per_class = a.per_class;
  sc.noise_frames_per_class = a.noise;
  sc.seed = c.seed;
  const auto data = eval::synthesize(sc);
  const fs::path out = out_dir(c) / "frames.jsonl";
  eval::write_jsonl(out, data.frames);
  json names = data.class_names;
  eval::write_text(out_dir(c) / "classes.json", names.dump() + "\n");

  // The same frames as one Ethernet capture; raw IP frames get a fixed MAC header.
  static constexpr std::uint8_t kEthernetHeader[14] = {2, 0, 0, 0, 0, 1, 2, 0, 0, 0, 0, 2, 0x08, 0x00};
  net::PcapFile capture;
  capture.linktype = net::kLinktypeEthernet;
  for (std::size_t i = 0; i < data.frames.size(); ++i) {
    const auto& f = data.frames[i];
    net::PcapRecord rec;
    rec.ts_sec = static_cast<std::uint32_t>(i / 1000);
    rec.ts_usec = static_cast<std::uint32_t>(i % 1000) * 1000;
    rec.data = f.linktype == net::kLinktypeEthernet ? f.bytes : net::join_link_frame(kEthernetHeader, f.bytes);
    rec.orig_len = static_cast<std::uint32_t>(rec.data.size());
    capture.records.push_back(std::move(rec));
  }
  const fs::path pcap_out = out_dir(c) / "capture.pcap";
  net::write_pcap(pcap_out, capture);
  write_manifest(c, {"synth", {}, {out.string(), (out_dir(c) / "classes.json").string(), pcap_out.string()}, {}});
  std::printf("%zu frames, %zu classes -> %s\n", data.frames.size(), data.class_names.size(), out.c_str());
}

// ---- preprocess -----------------------------------------------------------

struct PreprocessArgs {
  std::string in;
  std::string labels;
  std::string classes;
};

void cmd_preprocess(const Common& c, const PreprocessArgs& a) {
  std::vector<eval::RawFrame> frames;
  std::vector<std::string> names;
  if (fs::is_directory(a.in)) {
    require_file(a.labels, ErrorCode::Io, "labels.csv");
    frames = eval::read_pcap_directory(a.in, a.labels, names);
  } else {
    require_file(a.in, ErrorCode::Io, "input");
    frames = eval::read_jsonl(a.in);
    if (!a.classes.empty()) {
      require_file(a.classes, ErrorCode::Io, "class list");
      try {
        names = json::parse(read_text(a.classes)).get<std::vector<std::string>>();
      } catch (const json::exception& e) {
        fail(ErrorCode::Config, "bad class list: " + std::string(e.what()));
      }
    } else {
      int max_label = -1;
      for (const auto& f : frames) max_label = std::max(max_label, f.label);
      for (int i = 0; i <= max_label; ++i) names.push_back("class" + std::to_string(i));
    }
  }
  eval::PreprocessStats stats;
  const auto ds = eval::preprocess(frames, names, c.seed, &stats);
  const fs::path out = out_dir(c) / "dataset.jsonl";
  eval::save_dataset(out, ds);
  json s = {{"input", stats.input},           {"non_ipv4", stats.non_ipv4}, {"other_protocol", stats.other_protocol},
            {"dhcp", stats.dhcp},             {"no_payload", stats.no_payload}, {"too_short", stats.too_short},
            {"kept", stats.kept},             {"train", ds.splits.train.size()}, {"val", ds.splits.val.size()},
            {"test", ds.splits.test.size()}};
  eval::write_text(out_dir(c) / "preprocess_stats.json", s.dump(2) + "\n");
  write_manifest(c, {"preprocess", {a.in, a.labels}, {out.string()}, {}});
  std::printf("kept %zu of %zu frames (train %zu, val %zu, test %zu) -> %s\n", stats.kept, stats.input,
              ds.splits.train.size(), ds.splits.val.size(), ds.splits.test.size(), out.c_str());
}

// ---- train-classifier -----------------------------------------------------

struct ClassifierArgs {
  std::string dataset;
  int epochs = 4;
  int model_dim = 32;
  int input_length = 128;
};

void cmd_train_classifier(const Common& c, const ClassifierArgs& a) {
  const auto ds = open_dataset(a.dataset);
  classifier::ToyClassifierConfig cc;
  cc.num_classes = ds.num_classes();
  cc.epochs = a.epochs;
  cc.model_dim = a.model_dim;
  cc.input_length = a.input_length;
  cc.seed = c.seed;
  const auto clf = classifier::train_toy(ds.examples(ds.splits.train), cc, [](int epoch, double loss) {
    std::printf("epoch %d loss %.4f\n", epoch, loss);
  });
  const fs::path out = out_dir(c) / "classifier.ckpt";
  clf.save(out);
  const double test_acc = classifier::accuracy(clf, ds.examples(ds.splits.test));
  write_manifest(c, {"train-classifier", {a.dataset}, {out.string()}, out.string()});
  std::printf("test accuracy %.4f -> %s\n", test_acc, out.c_str());
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string dataset;
  std::size_t episodes = 0;
};

rl::TrainConfig train_config(const Common& c) {
  rl::TrainConfig tc;
  if (!c.config.empty()) {
    require_file(c.config, ErrorCode::Config, "config");
    tc = rl::parse_train_config(read_text(c.config));
  }
  tc.seed = c.seed;
  tc.budget = c.budget;
  tc.scheme = perturb::parse_scheme(c.scheme);
  return tc;
}

void cmd_train(const Common& c, const TrainArgs& a) {
  const auto ds = open_dataset(a.dataset);
  const auto oracle = open_oracle(c);
  rl::TrainConfig tc = train_config(c);
  if (a.episodes > 0) tc.max_episodes = a.episodes;
  const auto packets = ds.packets(ds.splits.train);
  std::ostringstream history;
  history << "update,episode,mean_episode_reward,actor_objective,critic_loss,mean_entropy\n";
  const auto result = rl::train(packets, *oracle, tc, [&](const rl::TrainStats& s) {
    history << s.update << ',' << s.episode << ',' << s.mean_episode_reward << ',' << s.actor_objective << ','
            << s.critic_loss << ',' << s.mean_entropy << '\n';
    if (s.update % 20 == 0) {
      std::printf("update %zu episode %zu reward %.4f entropy %.4f\n", s.update, s.episode, s.mean_episode_reward,
                  s.mean_entropy);
    }
  });
  const fs::path out = out_dir(c) / "policy.ckpt";
  rl::save_policy(out, result.policy, result.critic,
                  {rl::policy_version_of(result.policy), tc.budget, std::string(perturb::scheme_name(tc.scheme))});
  eval::write_text(out_dir(c) / "train_history.csv", history.str());
  eval::write_text(out_dir(c) / "train_config.json", rl::train_config_json(tc) + "\n");
  write_manifest(c, {"train", {a.dataset}, {out.string()}, out.string()});
  std::printf("%zu episodes, %zu updates -> %s\n", result.episodes, result.updates, out.c_str());
}

// ---- perturb / deperturb --------------------------------------------------

struct PerturbArgs {
  std::string in;
  std::string checkpoint;
  std::string cache;
  std::size_t target = 1500;
  bool greedy = false;
};

void cmd_perturb(const Common& c, const PerturbArgs& a) {
  require_file(a.in, ErrorCode::Io, "input capture");
  const bool use_cache = c.scheme == "cache";
  const perturb::Scheme scheme = use_cache ? perturb::Scheme::PrePad : perturb::parse_scheme(c.scheme);
  std::optional<rl::LoadedPolicy> policy;
  if (!a.checkpoint.empty()) policy = open_policy(a.checkpoint);
  std::optional<perturb::SequenceCache> cache;
  if (use_cache) {
    require_file(a.cache, ErrorCode::Config, "sequence cache");
    cache = perturb::read_cache(a.cache);
  }

  net::PcapFile file = net::read_pcap(a.in);
  std::vector<perturb::SidecarEntry> sidecar;
  std::mt19937_64 rng(c.seed);
  for (std::size_t i = 0; i < file.records.size(); ++i) {
    net::PcapRecord& rec = file.records[i];
    const auto frame = net::split_link_frame(file.linktype, rec.data);
    if (!frame) continue;
    net::ParsedPacket pkt;
    try {
      pkt = net::parse_packet(frame->ip_bytes);
    } catch (const Error&) {
      continue;  // not TCP/UDP over IPv4: forwarded untouched
    }
    perturb::Perturbed out;
    if (use_cache) {
      out = perturb::cache_pad(pkt, *cache, rng);
    } else if (scheme == perturb::Scheme::PostPad) {
      out = {perturb::post_pad(pkt, perturb::random_sequence(c.budget, rng()).bytes),
             perturb::post_pad_record(c.budget)};
    } else if (scheme == perturb::Scheme::FixedPad) {
      out = {perturb::fixed_pad(pkt, std::max(a.target, pkt.computed_total_length())),
             perturb::fixed_pad_record(pkt, a.target)};
    } else if (policy) {
      out = rl::perturb_with_policy(policy->policy, pkt, c.budget, scheme, rng, a.greedy);
    } else {
      out = perturb::pre_pad(pkt, perturb::random_sequence(c.budget, rng()).bytes);
    }
    rec.data = net::join_link_frame(frame->link_header, net::serialize(out.packet));
    rec.orig_len = static_cast<std::uint32_t>(rec.data.size());
    sidecar.push_back({i, out.record});
  }
  const fs::path pcap_out = out_dir(c) / "perturbed.pcap";
  const fs::path sidecar_out = out_dir(c) / "sidecar.jsonl";
  net::write_pcap(pcap_out, file);
  perturb::write_sidecar(sidecar_out, sidecar);
  write_manifest(c, {"perturb", {a.in, a.cache}, {pcap_out.string(), sidecar_out.string()}, a.checkpoint});
  std::printf("perturbed %zu of %zu records -> %s\n", sidecar.size(), file.records.size(), pcap_out.c_str());
}

struct DeperturbArgs {
  std::string in;
  std::string sidecar;
};

void cmd_deperturb(const Common& c, const DeperturbArgs& a) {
  require_file(a.in, ErrorCode::Io, "input capture");
  require_file(a.sidecar, ErrorCode::Io, "sidecar");
  net::PcapFile file = net::read_pcap(a.in);
  const auto sidecar = perturb::read_sidecar(a.sidecar);
  for (const auto& entry : sidecar) {
    if (entry.index >= file.records.size()) {
      fail(ErrorCode::InconsistentRecord, "sidecar index " + std::to_string(entry.index) + " beyond capture");
    }
    net::PcapRecord& rec = file.records[entry.index];
    const auto frame = net::split_link_frame(file.linktype, rec.data);
    if (!frame) fail(ErrorCode::InconsistentRecord, "sidecar names a non-IPv4 record");
    const auto restored = perturb::de_perturb(net::parse_packet(frame->ip_bytes), entry.record);
    rec.data = net::join_link_frame(frame->link_header, net::serialize(restored));
    rec.orig_len = static_cast<std::uint32_t>(rec.data.size());
  }
  const fs::path out = out_dir(c) / "restored.pcap";
  net::write_pcap(out, file);
  write_manifest(c, {"deperturb", {a.in, a.sidecar}, {out.string()}, {}});
  std::printf("restored %zu records -> %s\n", sidecar.size(), out.c_str());
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string dataset;
  std::string split = "test";
  std::string checkpoint;
  std::string postpad_checkpoint;
  std::string cache;
  bool burst = false;
  bool greedy = false;
};

void cmd_eval(const Common& c, const EvalArgs& a) {
  const auto ds = open_dataset(a.dataset);
  const auto oracle = open_oracle(c);
  const auto& indices = split_of(ds, a.split);
  std::optional<rl::LoadedPolicy> policy;
  if (!a.checkpoint.empty()) policy = open_policy(a.checkpoint);
  std::optional<rl::LoadedPolicy> post_policy;
  if (!a.postpad_checkpoint.empty()) post_policy = open_policy(a.postpad_checkpoint);
  std::optional<perturb::SequenceCache> cache;
  if (!a.cache.empty()) {
    require_file(a.cache, ErrorCode::Config, "sequence cache");
    cache = perturb::read_cache(a.cache);
  }

  std::vector<eval::Defense> defenses = {eval::no_defense(), eval::rand_post_pad(c.budget, c.seed + 1),
                                         eval::fixed_pad_defense()};
  if (post_policy) {
    defenses.push_back(eval::policy_defense("RLPostPad", post_policy->policy, c.budget, perturb::Scheme::PostPad,
                                            c.seed + 5, a.greedy));
  }
  defenses.push_back(eval::random_pre_pad(c.budget, c.seed + 2));
  if (policy) {
    defenses.push_back(eval::policy_defense("PrePad-policy", policy->policy, c.budget,
                                            perturb::parse_scheme(c.scheme), c.seed + 3, a.greedy));
  }
  if (cache) defenses.push_back(eval::cache_defense(*cache, c.seed + 4));

  eval::EvalReport report;
  if (a.burst) {
    const auto bursts = eval::make_bursts(ds, indices);
    report = eval::eval_burst_defense(*oracle, ds, bursts, defenses, c.budget, job_count(c));
  } else {
    report = eval::eval_packet_defense(*oracle, ds, indices, defenses, c.budget, job_count(c));
  }
  const fs::path dir = out_dir(c);
  const std::string stem = a.burst ? "burst_report" : "packet_report";
  eval::write_text(dir / (stem + ".json"), eval::report_json(report));
  eval::write_text(dir / (stem + ".txt"), eval::report_text(report));
  write_manifest(c, {"eval", {a.dataset, a.cache}, {(dir / (stem + ".json")).string()}, a.checkpoint});
  std::fputs(eval::report_text(report).c_str(), stdout);
}

// ---- sweep ----------------------------------------------------------------

struct SweepArgs {
  std::string kind;
  std::string dataset;
  std::string split = "test";
  std::string checkpoint;
};

void cmd_sweep(const Common& c, const SweepArgs& a) {
  const auto ds = open_dataset(a.dataset);
  const auto oracle = open_oracle(c);
  const auto& indices = split_of(ds, a.split);
  const fs::path dir = out_dir(c);
  std::vector<std::string> outputs;
  auto emit = [&](const std::string& name, const std::string& x, const std::vector<eval::SweepPoint>& pts) {
    eval::write_text(dir / (name + ".csv"), eval::sweep_csv(x, pts));
    eval::write_text(dir / (name + ".json"), eval::sweep_json(x, pts));
    outputs.push_back((dir / (name + ".csv")).string());
    std::fputs(eval::sweep_csv(x, pts).c_str(), stdout);
  };

  if (a.kind == "truncation") {
    const auto pts = classifier::truncation_sweep(*oracle, ds.examples(indices), classifier::kDefaultTruncationLengths);
    eval::write_text(dir / "truncation.csv", eval::truncation_csv(pts));
    outputs.push_back((dir / "truncation.csv").string());
    std::fputs(eval::truncation_csv(pts).c_str(), stdout);
  } else if (a.kind == "length") {
    std::optional<rl::LoadedPolicy> policy;
    if (!a.checkpoint.empty()) policy = open_policy(a.checkpoint);
    emit("length_random_prepad", "length", eval::sweep_padding_length(*oracle, ds, indices, eval::kSweepPaddingLengths,
                                                                       [&](std::size_t n) {
                                                                         return eval::random_pre_pad(n, c.seed);
                                                                       },
                                                                       job_count(c)));
    emit("length_random_postpad", "length", eval::sweep_padding_length(*oracle, ds, indices, eval::kSweepPaddingLengths,
                                                                        [&](std::size_t n) {
                                                                          return eval::rand_post_pad(n, c.seed);
                                                                        },
                                                                        job_count(c)));
    if (policy) {
      emit("length_policy", "length", eval::sweep_padding_length(*oracle, ds, indices, eval::kSweepPaddingLengths,
                                                                  [&](std::size_t n) {
                                                                    return eval::policy_defense(
                                                                        "PrePad-policy", policy->policy, n,
                                                                        perturb::Scheme::PrePad, c.seed);
                                                                  },
                                                                  job_count(c)));
    }
  } else if (a.kind == "temperature") {
    const auto policy = open_policy(a.checkpoint);
    emit("temperature", "temperature",
         eval::sweep_temperature(*oracle, ds, indices, policy.policy, eval::kSweepTemperatures, c.budget, c.seed,
                                 job_count(c)));
  } else if (a.kind == "alpha") {
    emit("alpha", "alpha",
         eval::sweep_entropy_alpha(*oracle, ds, ds.splits.train, indices, train_config(c), eval::kSweepAlphas,
                                   job_count(c)));
  } else {
    fail(ErrorCode::Usage, "sweep kind must be truncation, length, temperature or alpha, got " + a.kind);
  }
  write_manifest(c, {"sweep " + a.kind, {a.dataset}, outputs, a.checkpoint});
}

// ---- cache ----------------------------------------------------------------

struct CacheArgs {
  std::string checkpoint;
  std::string dataset;
  std::size_t k = 256;
};

void cmd_cache(const Common& c, const CacheArgs& a) {
  const auto policy = open_policy(a.checkpoint);
  const auto ds = open_dataset(a.dataset);
  const auto samples = ds.packets(ds.splits.train);
  const auto cache = rl::build_cache(policy.policy, samples, a.k, c.budget, c.seed);
  const fs::path out = out_dir(c) / "cache.txt";
  perturb::write_cache(out, cache);
  write_manifest(c, {"cache", {a.dataset}, {out.string()}, a.checkpoint});
  std::printf("%zu sequences of %zu bytes -> %s\n", cache.entries.size(), cache.sequence_length(), out.c_str());
}

// ---- latency --------------------------------------------------------------

struct LatencyArgs {
  std::string dataset;
  std::string checkpoint;
  std::string cache;
  std::size_t count = 10000;
};

void cmd_latency(const Common& c, const LatencyArgs& a) {
  const auto ds = open_dataset(a.dataset);
  std::vector<Bytes> wire;
  for (std::size_t i : ds.splits.test) wire.push_back(net::serialize(ds.samples[i].packet));
  std::mt19937_64 rng(c.seed);
  std::optional<rl::LoadedPolicy> policy;
  std::optional<perturb::SequenceCache> cache;
  std::function<void(ByteView, std::size_t)> op;
  if (c.scheme == "cache") {
    require_file(a.cache, ErrorCode::Config, "sequence cache");
    cache = perturb::read_cache(a.cache);
    op = [&](ByteView raw, std::size_t) { (void)net::serialize(perturb::cache_pad(net::parse_packet(raw), *cache, rng).packet); };
  } else if (!a.checkpoint.empty()) {
    policy = open_policy(a.checkpoint);
    const auto scheme = perturb::parse_scheme(c.scheme);
    op = [&](ByteView raw, std::size_t) {
      (void)net::serialize(rl::perturb_with_policy(policy->policy, net::parse_packet(raw), c.budget, scheme, rng).packet);
    };
  } else {
    const auto seq = perturb::random_sequence(c.budget, c.seed).bytes;
    op = [&](ByteView raw, std::size_t) { (void)net::serialize(perturb::pre_pad(net::parse_packet(raw), seq).packet); };
  }
  const auto stats = eval::measure_latency(wire, op, a.count);
  const std::string scheme = policy ? c.scheme + "-policy" : c.scheme;
  const fs::path out = out_dir(c) / "latency.json";
  eval::write_text(out, eval::latency_json(stats, scheme));
  write_manifest(c, {"latency", {a.dataset, a.cache}, {out.string()}, a.checkpoint});
  std::printf("%s: %zu packets, mean %.4f ms, variance %.6f ms^2\n", scheme.c_str(), stats.count, stats.mean_ms,
              stats.variance_ms2);
}

// ---- serve-stub / contract ------------------------------------------------

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
};

void cmd_serve_stub(const Common& c, const ServeArgs& a) {
  std::unique_ptr<classifier::Oracle> oracle;
  if (c.oracle.empty()) {
    oracle = std::make_unique<classifier::ReferenceOracle>();
  } else {
    oracle = open_oracle(c);
  }
  classifier::OracleServer server(*oracle, a.host, a.port);
  std::printf("serving on %s\n", server.url().c_str());
  std::fflush(stdout);
  server.serve_forever();
}

struct ContractArgs {
  std::string golden;
  std::string url;
};

// Replays golden request/response pairs against a running service.
void cmd_contract(const Common&, const ContractArgs& a) {
  require_file(a.golden, ErrorCode::Io, "golden file");
  json golden;
  try {
    golden = json::parse(read_text(a.golden));
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, "bad golden file: " + std::string(e.what()));
  }
  httplib::Client client(a.url);
  client.set_read_timeout(10, 0);
  int failed = 0, checked = 0;
  for (const auto& pair : golden.at("pairs")) {
    if (pair.contains("oracle_caps")) continue;  // needs a differently-configured service
    const std::string body = pair.at("request").is_string() ? pair.at("request").get<std::string>()
                                                            : pair.at("request").dump();
    const std::string name = pair.at("name");
    bool ok = false;
    std::string detail;
    const auto res = client.Post(pair.at("path").get<std::string>(), body, "application/json");
    if (!res) {
      detail = httplib::to_string(res.error());
    } else if (res->status != pair.at("status").get<int>()) {
      detail = "status " + std::to_string(res->status);
    } else if (pair.at("response").contains("error")) {
      ok = true;
    } else {
      const json got = json::parse(res->body, nullptr, false);
      ok = got == pair.at("response");
      if (!ok) detail = res->body;
    }
    ++checked;
    failed += !ok;
    std::printf("%s %s%s%s\n", ok ? "ok  " : "FAIL", name.c_str(), detail.empty() ? "" : ": ", detail.c_str());
  }
  std::printf("%d/%d pairs match\n", checked - failed, checked);
  if (failed > 0) fail(ErrorCode::ProtocolError, std::to_string(failed) + " contract pairs differ");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"advpad: adversarial pre-padding for packet classifiers"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--seed", common.seed, "Seed for every random choice");
  app.add_option("--config", common.config, "Training config (key=value lines or JSON)");
  app.add_option("--scheme", common.scheme, "prepad | postpad | fixedpad | cache")
      ->check(CLI::IsMember({"prepad", "postpad", "fixedpad", "cache"}));
  app.add_option("--budget", common.budget, "Padding bytes per packet");
  app.add_option("--oracle", common.oracle, "toy:PATH or remote:URL (default remote:$ADVPAD_ORACLE_URL)");
  app.add_option("--jobs", common.jobs, "Worker threads (default: all cores)");
  app.add_option("--out", common.out, "Output directory");

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "Generate a labeled synthetic capture as JSONL");
  s_synth->add_option("--classes", synth.classes);
  s_synth->add_option("--per-class", synth.per_class);
  s_synth->add_option("--noise", synth.noise, "Extra ARP/DHCP frames per class");
  s_synth->callback([&] { cmd_synth(common, synth); });

  PreprocessArgs pre;
  auto* s_pre = app.add_subcommand("preprocess", "Filter, strip and split a capture");
  s_pre->add_option("--in", pre.in, "pcap directory or JSONL file")->required();
  s_pre->add_option("--labels", pre.labels, "labels.csv for a pcap directory");
  s_pre->add_option("--classes", pre.classes, "JSON list of class names for JSONL input");
  s_pre->callback([&] { cmd_preprocess(common, pre); });

  ClassifierArgs clf;
  auto* s_clf = app.add_subcommand("train-classifier", "Train the toy byte classifier");
  s_clf->add_option("--dataset", clf.dataset)->required();
  s_clf->add_option("--epochs", clf.epochs);
  s_clf->add_option("--model-dim", clf.model_dim);
  s_clf->add_option("--input-length", clf.input_length);
  s_clf->callback([&] { cmd_train_classifier(common, clf); });

  TrainArgs train;
  auto* s_train = app.add_subcommand("train", "Train the padding policy against an oracle");
  s_train->add_option("--dataset", train.dataset)->required();
  s_train->add_option("--episodes", train.episodes, "Override max_episodes");
  s_train->callback([&] { cmd_train(common, train); });

  PerturbArgs pert;
  auto* s_pert = app.add_subcommand("perturb", "Pad every TCP/UDP packet of a capture");
  s_pert->add_option("--in", pert.in)->required();
  s_pert->add_option("--checkpoint", pert.checkpoint, "Policy checkpoint (default: random bytes)");
  s_pert->add_option("--cache", pert.cache, "Sequence cache for --scheme cache");
  s_pert->add_option("--target", pert.target, "Target IP length for fixedpad");
  s_pert->add_flag("--greedy", pert.greedy);
  s_pert->callback([&] { cmd_perturb(common, pert); });

  DeperturbArgs dep;
  auto* s_dep = app.add_subcommand("deperturb", "Undo perturbation using the sidecar");
  s_dep->add_option("--in", dep.in)->required();
  s_dep->add_option("--sidecar", dep.sidecar)->required();
  s_dep->callback([&] { cmd_deperturb(common, dep); });

  EvalArgs ev;
  auto* s_eval = app.add_subcommand("eval", "ACC of every defense on a dataset split");
  s_eval->add_option("--dataset", ev.dataset)->required();
  s_eval->add_option("--split", ev.split);
  s_eval->add_option("--checkpoint", ev.checkpoint);
  s_eval->add_option("--postpad-checkpoint", ev.postpad_checkpoint, "Policy trained with --scheme postpad");
  s_eval->add_option("--cache", ev.cache);
  s_eval->add_flag("--burst", ev.burst);
  s_eval->add_flag("--greedy", ev.greedy);
  s_eval->callback([&] { cmd_eval(common, ev); });

  SweepArgs sw;
  auto* s_sweep = app.add_subcommand("sweep", "Parameter sweeps emitted as CSV and JSON");
  s_sweep->add_option("kind", sw.kind, "truncation | length | temperature | alpha")->required();
  s_sweep->add_option("--dataset", sw.dataset)->required();
  s_sweep->add_option("--split", sw.split);
  s_sweep->add_option("--checkpoint", sw.checkpoint);
  s_sweep->callback([&] { cmd_sweep(common, sw); });

  CacheArgs ca;
  auto* s_cache = app.add_subcommand("cache", "Pre-generate policy sequences");
  s_cache->add_option("--checkpoint", ca.checkpoint)->required();
  s_cache->add_option("--dataset", ca.dataset)->required();
  s_cache->add_option("--k", ca.k);
  s_cache->callback([&] { cmd_cache(common, ca); });

  LatencyArgs la;
  auto* s_lat = app.add_subcommand("latency", "Per-packet perturbation latency");
  s_lat->add_option("--dataset", la.dataset)->required();
  s_lat->add_option("--checkpoint", la.checkpoint);
  s_lat->add_option("--cache", la.cache);
  s_lat->add_option("--count", la.count);
  s_lat->callback([&] { cmd_latency(common, la); });

  ServeArgs sv;
  auto* s_serve = app.add_subcommand("serve-stub", "Serve an oracle over the HTTP wire protocol");
  s_serve->add_option("--host", sv.host);
  s_serve->add_option("--port", sv.port);
  s_serve->callback([&] { cmd_serve_stub(common, sv); });

  ContractArgs ct;
  auto* s_ct = app.add_subcommand("contract", "Replay golden pairs against an oracle service");
  s_ct->add_option("--golden", ct.golden)->required();
  s_ct->add_option("--url", ct.url, "http://host:port")->required();
  s_ct->callback([&] { cmd_contract(common, ct); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::fprintf(stderr, "error: Usage: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", std::string(error_code_name(e.code())).c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: Io: %s\n", e.what());
    return 1;
  }
  return 0;
}
