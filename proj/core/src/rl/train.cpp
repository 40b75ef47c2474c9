#include "advpad/rl/train.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "advpad/error.hpp"
#include "json.hpp"

namespace advpad::rl {

using nn::Matrix;

std::vector<StepTargets> compute_returns_and_advantages(const Trajectory& trajectory, double discount) {
  std::vector<StepTargets> out(trajectory.steps.size());
  double running = 0.0;
  for (std::size_t i = out.size(); i-- > 0;) {
    running = trajectory.steps[i].reward + discount * running;
    out[i].ret = running;
    out[i].advantage = running - trajectory.steps[i].value;
  }
  return out;
}

void normalize_advantages(std::span<StepTargets> targets) {
  if (targets.empty()) return;
  // Identical returns carry no learning signal; what remains is critic error.
  const bool flat = std::all_of(targets.begin(), targets.end(),
                                [&](const StepTargets& t) { return t.ret == targets.front().ret; });
  if (flat) {
    for (auto& t : targets) t.advantage = 0.0;
    return;
  }
  double mean = 0.0;
  for (const auto& t : targets) mean += t.advantage;
  mean /= static_cast<double>(targets.size());
  double var = 0.0;
  for (const auto& t : targets) var += (t.advantage - mean) * (t.advantage - mean);
  var /= static_cast<double>(targets.size());
  const double sd = std::sqrt(var);
  for (auto& t : targets) {
    t.advantage -= mean;
    if (sd > 1e-8) t.advantage /= sd;
  }
}

ActorTerms actor_objective(const PolicyModel& policy, std::span<const Sample> batch, const ActorSettings& settings,
                           nn::Gradients* grads, const std::vector<double>* frozen_weights) {
  ActorTerms terms;
  if (batch.empty()) return terms;
  if (frozen_weights && frozen_weights->size() != batch.size()) {
    fail(ErrorCode::Config, "frozen weights must match the batch size");
  }
  const double tau = policy.temperature;
  if (!(tau > 0.0)) fail(ErrorCode::NonPositiveTemperature, "softmax temperature must be positive");
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  terms.weights.resize(batch.size());

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Sample& s = batch[i];
    nn::Tape tape(policy.net.parameters(), grads);
    const auto z = policy.net.forward(tape, s.observation, s.step);
    const Matrix& zv = tape.value(z);
    const auto k = static_cast<std::size_t>(zv.cols());
    if (s.action < 0 || static_cast<std::size_t>(s.action) >= k) fail(ErrorCode::Config, "action out of range");

    // Log-softmax of z / tau.
    const double mx = zv.maxCoeff();
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += std::exp((zv(0, j) - mx) / tau);
    const double log_sum = std::log(sum);
    std::vector<double> logp(k), p(k);
    for (std::size_t j = 0; j < k; ++j) {
      logp[j] = (zv(0, j) - mx) / tau - log_sum;
      p[j] = std::exp(logp[j]);
    }
    const auto a = static_cast<std::size_t>(s.action);
    double shannon = 0.0;
    for (std::size_t j = 0; j < k; ++j) shannon -= p[j] * logp[j];

    const double ratio = std::exp(logp[a] - s.log_prob_old);
    double w = ratio;
    if (frozen_weights) {
      w = (*frozen_weights)[i];
    } else if (settings.clip_enabled) {
      const bool above = s.advantage > 0.0 && ratio > 1.0 + settings.clip_epsilon;
      const bool below = s.advantage < 0.0 && ratio < 1.0 - settings.clip_epsilon;
      if (above || below) w = 0.0;
    }
    terms.weights[i] = w;
    terms.mean_ratio += ratio * inv_n;

    const double ent = settings.entropy_form == EntropyForm::Sampled ? -p[a] * logp[a] : shannon;
    terms.policy_term += w * logp[a] * s.advantage * inv_n;
    terms.entropy_term += ent * inv_n;

    if (grads) {
      Matrix seed(1, static_cast<Eigen::Index>(k));
      for (std::size_t j = 0; j < k; ++j) {
        const double dlogp = ((j == a ? 1.0 : 0.0) - p[j]) / tau;
        double g = w * s.advantage * dlogp;
        if (settings.entropy_form == EntropyForm::Sampled) {
          g += settings.alpha * (-(logp[a] + 1.0) * p[a] * dlogp);
        } else {
          g += settings.alpha * (-p[j] * (logp[j] + shannon) / tau);
        }
        seed(0, static_cast<Eigen::Index>(j)) = g * inv_n;
      }
      tape.backward(z, seed);
    }
  }
  terms.objective = terms.policy_term + settings.alpha * terms.entropy_term;
  return terms;
}

double critic_loss(const CriticModel& critic, std::span<const Sample> batch, nn::Gradients* grads) {
  if (batch.empty()) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const Sample& s : batch) {
    nn::Tape tape(critic.net.parameters(), grads);
    const auto v = critic.net.forward(tape, s.observation, s.step);
    const double diff = tape.value(v)(0, 0) - s.ret;
    loss += diff * diff * inv_n;
    if (grads) tape.backward(v, Matrix::Constant(1, 1, 2.0 * diff * inv_n));
  }
  return loss;
}

ActorTerms actor_update(PolicyModel& policy, nn::AdamW& optimizer, std::span<const Sample> batch,
                        const ActorSettings& settings, double max_grad_norm) {
  nn::Gradients g(policy.net.parameters());
  ActorTerms terms = actor_objective(policy, batch, settings, &g);
  if (!std::isfinite(terms.objective) || !g.all_finite()) {
    fail(ErrorCode::NaNLoss, "actor objective became non-finite");
  }
  g.scale(-1.0);  // the optimizer descends; we ascend J
  nn::clip_global_norm(g, max_grad_norm);
  optimizer.step(policy.net.parameters(), g);
  return terms;
}

double critic_update(CriticModel& critic, nn::AdamW& optimizer, std::span<const Sample> batch,
                     double max_grad_norm) {
  nn::Gradients g(critic.net.parameters());
  const double loss = critic_loss(critic, batch, &g);
  if (!std::isfinite(loss) || !g.all_finite()) fail(ErrorCode::NaNLoss, "critic loss became non-finite");
  nn::clip_global_norm(g, max_grad_norm);
  optimizer.step(critic.net.parameters(), g);
  return loss;
}

HeadedModelConfig TrainConfig::actor_model() const {
  HeadedModelConfig c;
  c.encoder = encoder;
  c.head_hidden = head_hidden;
  c.outputs = 256;
  c.seed = seed;
  return c;
}

HeadedModelConfig TrainConfig::critic_model() const {
  HeadedModelConfig c = actor_model();
  c.outputs = 1;
  c.seed = seed + 1;
  return c;
}

namespace {

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  fail(ErrorCode::Config, key + ": expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::Config, key + ": expected a number, got '" + v + "'");
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const auto n = std::stoull(v, &used);
      if (used == v.size()) return n;
    }
  } catch (const std::exception&) {
  }
  fail(ErrorCode::Config, key + ": expected a non-negative integer, got '" + v + "'");
}

int parse_int(const std::string& key, const std::string& v) { return static_cast<int>(parse_uint(key, v)); }

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void apply_key(TrainConfig& c, const std::string& key, const std::string& v) {
  using Setter = void (*)(TrainConfig&, const std::string&, const std::string&);
  static const std::map<std::string, Setter> setters = {
      {"reward_mode", [](TrainConfig& c, const std::string&, const std::string& v) { c.reward_mode = parse_reward_mode(v); }},
      {"distance_on", [](TrainConfig& c, const std::string&, const std::string& v) { c.distance_on = parse_distance_on(v); }},
      {"scheme", [](TrainConfig& c, const std::string&, const std::string& v) { c.scheme = perturb::parse_scheme(v); }},
      {"budget", [](TrainConfig& c, const std::string& k, const std::string& v) { c.budget = parse_uint(k, v); }},
      {"tau_soft", [](TrainConfig& c, const std::string& k, const std::string& v) { c.temperature = parse_double(k, v); }},
      {"temperature", [](TrainConfig& c, const std::string& k, const std::string& v) { c.temperature = parse_double(k, v); }},
      {"alpha", [](TrainConfig& c, const std::string& k, const std::string& v) { c.alpha = parse_double(k, v); }},
      {"discount", [](TrainConfig& c, const std::string& k, const std::string& v) { c.discount = parse_double(k, v); }},
      {"clip_enabled", [](TrainConfig& c, const std::string& k, const std::string& v) { c.clip_enabled = parse_bool(k, v); }},
      {"clip_epsilon", [](TrainConfig& c, const std::string& k, const std::string& v) { c.clip_epsilon = parse_double(k, v); }},
      {"normalize_advantages",
       [](TrainConfig& c, const std::string& k, const std::string& v) { c.normalize_advantages = parse_bool(k, v); }},
      {"entropy_form",
       [](TrainConfig& c, const std::string& k, const std::string& v) {
         if (v == "sampled") c.entropy_form = EntropyForm::Sampled;
         else if (v == "full") c.entropy_form = EntropyForm::Full;
         else fail(ErrorCode::Config, k + ": expected sampled or full");
       }},
      {"seed", [](TrainConfig& c, const std::string& k, const std::string& v) { c.seed = parse_uint(k, v); }},
      {"actor_lr", [](TrainConfig& c, const std::string& k, const std::string& v) { c.actor_lr = parse_double(k, v); }},
      {"critic_lr", [](TrainConfig& c, const std::string& k, const std::string& v) { c.critic_lr = parse_double(k, v); }},
      {"weight_decay", [](TrainConfig& c, const std::string& k, const std::string& v) { c.weight_decay = parse_double(k, v); }},
      {"batch_size", [](TrainConfig& c, const std::string& k, const std::string& v) { c.batch_size = parse_uint(k, v); }},
      {"update_epochs", [](TrainConfig& c, const std::string& k, const std::string& v) { c.update_epochs = parse_int(k, v); }},
      {"max_grad_norm", [](TrainConfig& c, const std::string& k, const std::string& v) { c.max_grad_norm = parse_double(k, v); }},
      {"max_episodes", [](TrainConfig& c, const std::string& k, const std::string& v) { c.max_episodes = parse_uint(k, v); }},
      {"model_dim", [](TrainConfig& c, const std::string& k, const std::string& v) { c.encoder.model_dim = parse_int(k, v); }},
      {"heads", [](TrainConfig& c, const std::string& k, const std::string& v) { c.encoder.heads = parse_int(k, v); }},
      {"layers", [](TrainConfig& c, const std::string& k, const std::string& v) { c.encoder.layers = parse_int(k, v); }},
      {"ff_dim", [](TrainConfig& c, const std::string& k, const std::string& v) { c.encoder.ff_dim = parse_int(k, v); }},
      {"max_input", [](TrainConfig& c, const std::string& k, const std::string& v) { c.encoder.max_input = parse_int(k, v); }},
      {"max_steps", [](TrainConfig& c, const std::string& k, const std::string& v) { c.encoder.max_steps = parse_int(k, v); }},
      {"head_hidden", [](TrainConfig& c, const std::string& k, const std::string& v) { c.head_hidden = parse_int(k, v); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) fail(ErrorCode::Config, "unknown config key '" + key + "'");
  it->second(c, key, v);
}

void check_config(const TrainConfig& c) {
  if (!(c.temperature > 0.0)) fail(ErrorCode::NonPositiveTemperature, "tau_soft must be positive");
  if (c.batch_size == 0) fail(ErrorCode::Config, "batch_size must be at least 1");
  if (c.update_epochs < 1) fail(ErrorCode::Config, "update_epochs must be at least 1");
  if (c.scheme == perturb::Scheme::FixedPad) fail(ErrorCode::Config, "training supports prepad and postpad only");
  if (c.encoder.model_dim < 1 || c.encoder.heads < 1 || c.encoder.model_dim % c.encoder.heads != 0) {
    fail(ErrorCode::Config, "model_dim must be a positive multiple of heads");
  }
  if (c.encoder.max_input < 1 || c.encoder.max_steps < 1 || c.encoder.ff_dim < 1) {
    fail(ErrorCode::Config, "encoder sizes must be positive");
  }
}

}  // namespace

TrainConfig parse_train_config(const std::string& text, TrainConfig base) {
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
    }
    for (const auto& [key, value] : j.items()) {
      apply_key(base, key, value.is_string() ? value.get<std::string>() : value.dump());
    }
  } else {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        fail(ErrorCode::Config, "config line " + std::to_string(lineno) + " is not key=value");
      }
      apply_key(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }
  check_config(base);
  return base;
}

std::string train_config_json(const TrainConfig& c) {
  nlohmann::json j;
  j["reward_mode"] = reward_mode_name(c.reward_mode);
  j["distance_on"] = distance_on_name(c.distance_on);
  j["scheme"] = perturb::scheme_name(c.scheme);
  j["budget"] = c.budget;
  j["tau_soft"] = c.temperature;
  j["alpha"] = c.alpha;
  j["discount"] = c.discount;
  j["clip_enabled"] = c.clip_enabled;
  j["clip_epsilon"] = c.clip_epsilon;
  j["normalize_advantages"] = c.normalize_advantages;
  j["entropy_form"] = c.entropy_form == EntropyForm::Sampled ? "sampled" : "full";
  j["seed"] = c.seed;
  j["actor_lr"] = c.actor_lr;
  j["critic_lr"] = c.critic_lr;
  j["weight_decay"] = c.weight_decay;
  j["batch_size"] = c.batch_size;
  j["update_epochs"] = c.update_epochs;
  j["max_grad_norm"] = c.max_grad_norm;
  j["max_episodes"] = c.max_episodes;
  j["model_dim"] = c.encoder.model_dim;
  j["heads"] = c.encoder.heads;
  j["layers"] = c.encoder.layers;
  j["ff_dim"] = c.encoder.ff_dim;
  j["max_input"] = c.encoder.max_input;
  j["max_steps"] = c.encoder.max_steps;
  j["head_hidden"] = c.head_hidden;
  return j.dump(2);
}

Bytes policy_observation(const EnvState& state, const EncoderConfig& encoder) {
  Bytes view = observe(state);
  if (view.size() > static_cast<std::size_t>(encoder.max_input)) view.resize(encoder.max_input);
  return view;
}

Trajectory rollout(const PolicyModel& policy, const CriticModel* critic, const classifier::Oracle* oracle,
                   const net::ParsedPacket& packet, std::size_t budget, perturb::Scheme scheme,
                   RewardMode mode, DistanceOn distance, std::mt19937_64& rng, bool greedy) {
  Trajectory traj;
  EnvState state = env_reset(packet, budget, scheme);
  const classifier::Want want = reward_want(mode, distance);
  classifier::Prediction before;
  if (oracle) before = oracle->predict(observe(state), want);
  const EncoderConfig& enc = policy.net.config().encoder;
  traj.steps.reserve(budget);
  while (!state.done()) {
    StepRecord rec;
    rec.observation = policy_observation(state, enc);
    rec.step = state.step;
    const std::vector<double> dist = policy.distribution(rec.observation, rec.step);
    rec.action = greedy ? greedy_action(dist) : sample_action(dist, rng);
    rec.log_prob_old = std::log(dist[static_cast<std::size_t>(rec.action)]);
    if (critic) rec.value = critic->value(rec.observation, rec.step);
    StepResult next = env_step(state, static_cast<std::uint8_t>(rec.action));
    if (oracle) {
      classifier::Prediction after = oracle->predict(observe(next.next), want);
      rec.reward = mode == RewardMode::BlackBox ? blackbox_reward(before, after)
                                                : whitebox_reward(before, after, distance);
      before = std::move(after);
    }
    traj.actions.push_back(static_cast<std::uint8_t>(rec.action));
    traj.steps.push_back(std::move(rec));
    state = std::move(next.next);
  }
  traj.final_packet = std::move(state.working);
  traj.terminal = true;
  return traj;
}

TrainResult train(std::span<const net::ParsedPacket> packets, const classifier::Oracle& oracle,
                  const TrainConfig& config, const std::function<void(const TrainStats&)>& on_update) {
  check_config(config);
  TrainResult result{PolicyModel(config.actor_model(), config.temperature), CriticModel(config.critic_model()), 0, 0,
                     {}};
  if (config.budget == 0) return result;
  if (packets.empty()) fail(ErrorCode::Config, "no training packets");
  classifier::require_capabilities(oracle.capabilities(), reward_want(config.reward_mode, config.distance_on));

  nn::AdamW actor_opt(result.policy.net.parameters(),
                      {config.actor_lr, 0.9, 0.999, 1e-8, config.weight_decay});
  nn::AdamW critic_opt(result.critic.net.parameters(),
                       {config.critic_lr, 0.9, 0.999, 1e-8, config.weight_decay});
  const ActorSettings settings{config.alpha, config.clip_enabled, config.clip_epsilon, config.entropy_form};

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(packets.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t total = config.max_episodes ? config.max_episodes : packets.size();

  std::vector<Sample> buffer;
  double reward_sum = 0.0;
  std::size_t buffered_episodes = 0;

  const auto update = [&] {
    if (config.normalize_advantages) {
      std::vector<StepTargets> t(buffer.size());
      for (std::size_t i = 0; i < buffer.size(); ++i) t[i] = {buffer[i].ret, buffer[i].advantage};
      normalize_advantages(t);
      for (std::size_t i = 0; i < buffer.size(); ++i) buffer[i].advantage = t[i].advantage;
    }
    TrainStats stats;
    stats.episode = result.episodes;
    stats.mean_episode_reward = reward_sum / static_cast<double>(buffered_episodes);
    std::vector<std::size_t> perm(buffer.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<Sample> mb;
    double objective = 0.0, closs = 0.0;
    int batches = 0;
    for (int e = 0; e < config.update_epochs; ++e) {
      std::shuffle(perm.begin(), perm.end(), rng);
      for (std::size_t start = 0; start < perm.size(); start += config.batch_size) {
        mb.clear();
        for (std::size_t i = start; i < std::min(perm.size(), start + config.batch_size); ++i) {
          mb.push_back(buffer[perm[i]]);
        }
        objective += actor_update(result.policy, actor_opt, mb, settings, config.max_grad_norm).objective;
        closs += critic_update(result.critic, critic_opt, mb, config.max_grad_norm);
        ++batches;
      }
    }
    stats.actor_objective = objective / batches;
    stats.critic_loss = closs / batches;
    double ent = 0.0;
    for (const Sample& s : buffer) ent += entropy(result.policy.distribution(s.observation, s.step));
    stats.mean_entropy = ent / static_cast<double>(buffer.size());
    stats.update = ++result.updates;
    if (on_update) on_update(stats);
    result.history.push_back(stats);
    buffer.clear();
    reward_sum = 0.0;
    buffered_episodes = 0;
  };

  for (std::size_t ep = 0; ep < total; ++ep) {
    if (ep % packets.size() == 0) std::shuffle(order.begin(), order.end(), rng);
    const net::ParsedPacket& pkt = packets[order[ep % packets.size()]];
    const Trajectory traj = rollout(result.policy, &result.critic, &oracle, pkt, config.budget, config.scheme,
                                    config.reward_mode, config.distance_on, rng);
    const std::vector<StepTargets> targets = compute_returns_and_advantages(traj, config.discount);
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
      const StepRecord& r = traj.steps[i];
      buffer.push_back({r.observation, r.step, r.action, r.log_prob_old, targets[i].advantage, targets[i].ret});
      reward_sum += r.reward;
    }
    ++buffered_episodes;
    ++result.episodes;
    if (buffer.size() >= config.batch_size || ep + 1 == total) update();
  }
  return result;
}

Bytes generate_sequence(const PolicyModel& policy, const net::ParsedPacket& packet, std::size_t budget,
                        perturb::Scheme scheme, std::mt19937_64& rng, bool greedy) {
  if (budget == 0) return {};
  return rollout(policy, nullptr, nullptr, packet, budget, scheme, RewardMode::BlackBox, DistanceOn::Embedding, rng,
                 greedy)
      .actions;
}

perturb::Perturbed perturb_with_policy(const PolicyModel& policy, const net::ParsedPacket& packet,
                                       std::size_t budget, perturb::Scheme scheme, std::mt19937_64& rng,
                                       bool greedy) {
  const Bytes seq = generate_sequence(policy, packet, budget, scheme, rng, greedy);
  if (scheme == perturb::Scheme::PostPad) return {perturb::post_pad(packet, seq), perturb::post_pad_record(seq.size())};
  return perturb::pre_pad(packet, seq);
}

perturb::SequenceCache build_cache(const PolicyModel& policy, std::span<const net::ParsedPacket> samples,
                                   std::size_t k, std::size_t len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const perturb::SequenceSource source = [&](const net::ParsedPacket& pkt, std::size_t n) {
    return generate_sequence(policy, pkt, n, perturb::Scheme::PrePad, rng);
  };
  return perturb::build_cache(source, samples, k, len, policy_version_of(policy));
}

}  // namespace advpad::rl
