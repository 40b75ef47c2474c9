#include "advpad/rl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "advpad/error.hpp"
#include "advpad/nn/checkpoint.hpp"
#include "json.hpp"

namespace advpad::rl {

using nn::Matrix;

SequenceEncoder::SequenceEncoder(const EncoderConfig& config, nn::ParameterStore& params,
                                 std::mt19937_64& rng)
    : config_(config) {
  const int d = config.model_dim;
  if (d % config.heads != 0) fail(ErrorCode::Config, "model_dim must be divisible by heads");
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  byte_embedding_ = params.add("enc.byte_embedding", nn::random_normal(config.vocab, d, 0.5, rng));
  position_embedding_ = params.add("enc.position_embedding", nn::random_normal(config.max_input, d, 0.1, rng));
  step_embedding_ = params.add("enc.step_embedding", nn::random_normal(config.max_steps, d, 0.5, rng));
  for (int l = 0; l < config.layers; ++l) {
    const std::string p = "enc.layer" + std::to_string(l) + ".";
    Layer layer;
    layer.ln1_g = params.add(p + "ln1.gamma", Matrix::Ones(1, d));
    layer.ln1_b = params.add(p + "ln1.beta", Matrix::Zero(1, d));
    layer.qkv_w = params.add(p + "attn.qkv.weight", nn::random_normal(d, 3 * d, s, rng));
    layer.qkv_b = params.add(p + "attn.qkv.bias", Matrix::Zero(1, 3 * d));
    layer.out_w = params.add(p + "attn.out.weight", nn::random_normal(d, d, s, rng));
    layer.out_b = params.add(p + "attn.out.bias", Matrix::Zero(1, d));
    layer.ln2_g = params.add(p + "ln2.gamma", Matrix::Ones(1, d));
    layer.ln2_b = params.add(p + "ln2.beta", Matrix::Zero(1, d));
    layer.ff1_w = params.add(p + "ff1.weight", nn::random_normal(d, config.ff_dim, s, rng));
    layer.ff1_b = params.add(p + "ff1.bias", Matrix::Zero(1, config.ff_dim));
    layer.ff2_w = params.add(p + "ff2.weight",
                             nn::random_normal(config.ff_dim, d, 1.0 / std::sqrt(config.ff_dim), rng));
    layer.ff2_b = params.add(p + "ff2.bias", Matrix::Zero(1, d));
    layers_.push_back(layer);
  }
  final_g_ = params.add("enc.final.gamma", Matrix::Ones(1, d));
  final_b_ = params.add("enc.final.beta", Matrix::Zero(1, d));
}

nn::Tape::Var SequenceEncoder::encode(nn::Tape& tape, std::span<const std::uint8_t> tokens,
                                      std::size_t step) const {
  const std::size_t n = std::min(tokens.size(), static_cast<std::size_t>(config_.max_input));
  const int step_row =
      static_cast<int>(std::min<std::size_t>(step == 0 ? 0 : step - 1, static_cast<std::size_t>(config_.max_steps - 1)));
  const int step_ids[1] = {step_row};
  auto x = tape.embed(step_embedding_, step_ids);
  if (n > 0) {
    std::vector<int> ids(n);
    std::vector<int> positions(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (tokens[i] >= config_.vocab) fail(ErrorCode::Config, "token outside encoder vocabulary");
      ids[i] = tokens[i];
      positions[i] = static_cast<int>(i);
    }
    const auto body = tape.add(tape.embed(byte_embedding_, ids), tape.embed(position_embedding_, positions));
    x = tape.concat_rows(x, body);
  }
  for (const Layer& layer : layers_) {
    const auto h = tape.layer_norm(x, layer.ln1_g, layer.ln1_b);
    const auto attn = tape.attention(tape.linear(h, layer.qkv_w, layer.qkv_b), config_.heads);
    x = tape.add(x, tape.linear(attn, layer.out_w, layer.out_b));
    const auto h2 = tape.layer_norm(x, layer.ln2_g, layer.ln2_b);
    const auto ff = tape.linear(tape.gelu(tape.linear(h2, layer.ff1_w, layer.ff1_b)), layer.ff2_w, layer.ff2_b);
    x = tape.add(x, ff);
  }
  return tape.row(tape.layer_norm(x, final_g_, final_b_), 0);
}

HeadedModel::HeadedModel(const HeadedModelConfig& config) : config_(config) {
  std::mt19937_64 rng(config.seed);
  encoder_ = SequenceEncoder(config.encoder, params_, rng);
  const int d = config.encoder.model_dim;
  if (config.head_hidden > 0) {
    h1_w_ = params_.add("head.fc1.weight", nn::random_normal(d, config.head_hidden, 1.0 / std::sqrt(d), rng));
    h1_b_ = params_.add("head.fc1.bias", Matrix::Zero(1, config.head_hidden));
    h2_w_ = params_.add("head.fc2.weight", nn::random_normal(config.head_hidden, config.outputs, 0.01, rng));
    h2_b_ = params_.add("head.fc2.bias", Matrix::Zero(1, config.outputs));
  } else {
    h2_w_ = params_.add("head.fc.weight", nn::random_normal(d, config.outputs, 0.01, rng));
    h2_b_ = params_.add("head.fc.bias", Matrix::Zero(1, config.outputs));
  }
}

nn::Tape::Var HeadedModel::forward(nn::Tape& tape, std::span<const std::uint8_t> tokens,
                                   std::size_t step) const {
  auto e = encoder_.encode(tape, tokens, step);
  if (config_.head_hidden > 0) e = tape.gelu(tape.linear(e, h1_w_, h1_b_));
  return tape.linear(e, h2_w_, h2_b_);
}

Matrix HeadedModel::evaluate(std::span<const std::uint8_t> tokens, std::size_t step) const {
  nn::Tape tape(params_);
  return tape.value(forward(tape, tokens, step));
}

std::vector<double> PolicyModel::logits(std::span<const std::uint8_t> obs, std::size_t step) const {
  const Matrix z = net.evaluate(obs, step);
  return std::vector<double>(z.data(), z.data() + z.size());
}

std::vector<double> PolicyModel::distribution(std::span<const std::uint8_t> obs, std::size_t step) const {
  const std::vector<double> z = logits(obs, step);
  return temperature_softmax(z, temperature);
}

double CriticModel::value(std::span<const std::uint8_t> obs, std::size_t step) const {
  return net.evaluate(obs, step)(0, 0);
}

std::vector<double> temperature_softmax(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0)) {
    fail(ErrorCode::NonPositiveTemperature, "softmax temperature must be positive");
  }
  std::vector<double> p(logits.size());
  if (p.empty()) return p;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp((logits[i] - mx) / temperature);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

int sample_action(std::span<const double> distribution, std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  double cumulative = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < distribution.size(); ++i) {
    if (distribution[i] <= 0.0) continue;
    cumulative += distribution[i];
    last_positive = static_cast<int>(i);
    if (u < cumulative) return last_positive;
  }
  return last_positive;
}

int greedy_action(std::span<const double> distribution) {
  return static_cast<int>(std::max_element(distribution.begin(), distribution.end()) - distribution.begin());
}

double entropy(std::span<const double> distribution) {
  double h = 0.0;
  for (double p : distribution) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

namespace {

nlohmann::json model_config_json(const HeadedModelConfig& c) {
  return {{"vocab", c.encoder.vocab},         {"model_dim", c.encoder.model_dim},
          {"heads", c.encoder.heads},         {"layers", c.encoder.layers},
          {"ff_dim", c.encoder.ff_dim},       {"max_input", c.encoder.max_input},
          {"max_steps", c.encoder.max_steps}, {"head_hidden", c.head_hidden},
          {"outputs", c.outputs},             {"seed", c.seed}};
}

HeadedModelConfig model_config_from_json(const nlohmann::json& j) {
  HeadedModelConfig c;
  c.encoder.vocab = j.at("vocab").get<int>();
  c.encoder.model_dim = j.at("model_dim").get<int>();
  c.encoder.heads = j.at("heads").get<int>();
  c.encoder.layers = j.at("layers").get<int>();
  c.encoder.ff_dim = j.at("ff_dim").get<int>();
  c.encoder.max_input = j.at("max_input").get<int>();
  c.encoder.max_steps = j.at("max_steps").get<int>();
  c.head_hidden = j.at("head_hidden").get<int>();
  c.outputs = j.at("outputs").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

std::string policy_version_of(const PolicyModel& policy) {
  nn::Checkpoint ckpt;
  ckpt.sections.push_back({"policy", policy.net.parameters()});
  return nn::git_blob_hash(nn::encode_checkpoint(ckpt)).substr(0, 12);
}

void save_policy(const std::filesystem::path& path, const PolicyModel& policy, const CriticModel& critic,
                 const PolicyCheckpointMeta& meta) {
  nlohmann::json j;
  j["model"] = "policy";
  j["policy_version"] = meta.policy_version.empty() ? policy_version_of(policy) : meta.policy_version;
  j["budget"] = meta.budget;
  j["scheme"] = meta.scheme;
  j["tau_soft"] = policy.temperature;
  j["policy_net"] = model_config_json(policy.net.config());
  j["critic_net"] = model_config_json(critic.net.config());
  nn::Checkpoint ckpt;
  ckpt.meta_json = j.dump();
  ckpt.sections.push_back({"policy", policy.net.parameters()});
  ckpt.sections.push_back({"critic", critic.net.parameters()});
  nn::save_checkpoint(path, ckpt);
}

LoadedPolicy load_policy(const std::filesystem::path& path) {
  const nn::Checkpoint ckpt = nn::load_checkpoint(path);
  try {
    const auto j = nlohmann::json::parse(ckpt.meta_json);
    if (j.at("model").get<std::string>() != "policy") fail(ErrorCode::Config, "checkpoint does not hold a policy");
    LoadedPolicy out{PolicyModel(model_config_from_json(j.at("policy_net")), j.at("tau_soft").get<double>()),
                     CriticModel(model_config_from_json(j.at("critic_net"))),
                     {j.at("policy_version").get<std::string>(), j.at("budget").get<std::size_t>(),
                      j.at("scheme").get<std::string>()}};
    nn::load_parameters(out.policy.net.parameters(), ckpt.section("policy"));
    nn::load_parameters(out.critic.net.parameters(), ckpt.section("critic"));
    return out;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Config, std::string("bad policy metadata: ") + e.what());
  }
}

}  // namespace advpad::rl
