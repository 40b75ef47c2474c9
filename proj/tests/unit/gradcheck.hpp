#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "advpad/rl/train.hpp"

namespace advpad::fixture {

// ||a - n|| / max(||a|| + ||n||, 1e-12) over the whole gradient vector.
inline double gradient_relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nn), 1e-12);
}

// Central differences of f around x.
inline std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& f,
                                            std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Two byte tokens of vocabulary 4, three actions, two steps.
inline rl::HeadedModelConfig toy_net_config(int outputs, std::uint64_t seed) {
  rl::HeadedModelConfig c;
  c.encoder.vocab = 4;
  c.encoder.model_dim = 4;
  c.encoder.heads = 2;
  c.encoder.layers = 1;
  c.encoder.ff_dim = 4;
  c.encoder.max_input = 3;
  c.encoder.max_steps = 2;
  c.head_hidden = 0;
  c.outputs = outputs;
  c.seed = seed;
  return c;
}

inline void randomize(nn::ParameterStore& params, std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> n(0.0, stddev);
  std::vector<double> flat = params.flatten();
  for (double& v : flat) v += n(rng);
  params.assign(flat);
}

// Two states, one per step, with random actions, advantages and returns.
inline std::vector<rl::Sample> toy_batch(std::mt19937_64& rng) {
  std::vector<rl::Sample> batch(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    rl::Sample& s = batch[i];
    s.observation = {static_cast<std::uint8_t>(rng() % 4), static_cast<std::uint8_t>(rng() % 4),
                     static_cast<std::uint8_t>(rng() % 4)};
    s.step = i + 1;
    s.action = static_cast<int>(rng() % 3);
    s.advantage = u(rng) * 2.0;
    s.ret = u(rng);
  }
  return batch;
}

struct GradCheckPoint {
  double actor_rel_error = 0.0;
  double critic_rel_error = 0.0;
  std::size_t actor_params = 0;
  std::size_t critic_params = 0;
};

// One random parameter point. The old log-probabilities come from a nearby
// policy so importance weights differ from 1 and the clip can engage.
inline GradCheckPoint gradient_check_point(std::uint64_t seed, rl::EntropyForm form, double alpha = 0.7) {
  std::mt19937_64 rng(seed);
  rl::PolicyModel policy(toy_net_config(3, seed));
  rl::CriticModel critic(toy_net_config(1, seed + 1));
  randomize(policy.net.parameters(), rng, 0.3);
  randomize(critic.net.parameters(), rng, 0.3);
  std::vector<rl::Sample> batch = toy_batch(rng);

  rl::PolicyModel old = policy;
  randomize(old.net.parameters(), rng, 0.2);
  for (rl::Sample& s : batch) {
    const auto d = old.distribution(s.observation, s.step);
    s.log_prob_old = std::log(d[static_cast<std::size_t>(s.action)]);
  }

  const rl::ActorSettings settings{alpha, true, 0.2, form};
  const std::vector<double> weights = rl::actor_objective(policy, batch, settings, nullptr).weights;

  GradCheckPoint out;
  out.actor_params = policy.net.parameters().scalar_count();
  out.critic_params = critic.net.parameters().scalar_count();

  nn::Gradients ga(policy.net.parameters());
  rl::actor_objective(policy, batch, settings, &ga, &weights);
  const auto na = numeric_gradient(
      [&](std::span<const double> x) {
        rl::PolicyModel p = policy;
        p.net.parameters().assign(x);
        return rl::actor_objective(p, batch, settings, nullptr, &weights).objective;
      },
      policy.net.parameters().flatten());
  out.actor_rel_error = gradient_relative_error(ga.flatten(), na);

  nn::Gradients gc(critic.net.parameters());
  rl::critic_loss(critic, batch, &gc);
  const auto nc = numeric_gradient(
      [&](std::span<const double> x) {
        rl::CriticModel c = critic;
        c.net.parameters().assign(x);
        return rl::critic_loss(c, batch, nullptr);
      },
      critic.net.parameters().flatten());
  out.critic_rel_error = gradient_relative_error(gc.flatten(), nc);
  return out;
}

}  // namespace advpad::fixture
