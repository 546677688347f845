#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rankher/env.hpp"
#include "rankher/network.hpp"
#include "rankher/optimizer.hpp"
#include "rankher/replay.hpp"
#include "rankher/rng.hpp"

namespace rankher {

using nn::Network;
using nn::Optimizer;

struct DdpgConfig {
  std::vector<std::size_t> hidden = {64, 64, 64};
  double gamma = 0.98;
  double tau = 0.05;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double noise_sigma = 0.2;  // Gaussian exploration noise std, action units
  double random_eps = 0.3;   // chance of replacing the action with a uniform one
  std::size_t batch_size = 64;
  bool normalize = true;  // running observation normalization
  void validate() const;
};

struct TrainStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double mean_q = 0.0;
  std::size_t batch_size = 0;
};

// Running mean/std normalizer with +-5 clipping; identity until the first
// observation.
class RunningNormalizer {
 public:
  RunningNormalizer() = default;
  explicit RunningNormalizer(std::size_t dim);
  void observe(const Tensor& x);
  Tensor normalize(const Tensor& x) const;
  std::size_t dim() const { return sum_.numel(); }
  std::uint64_t count() const { return count_; }
  const Tensor& sum() const { return sum_; }
  const Tensor& sumsq() const { return sumsq_; }
  void restore(Tensor sum, Tensor sumsq, std::uint64_t count);

 private:
  Tensor sum_;
  Tensor sumsq_;
  std::uint64_t count_ = 0;
};

// Deterministic actor-critic with target networks and soft updates.
class DdpgAgent {
 public:
  DdpgAgent(const GoalEnvSpec& env_spec, const DdpgConfig& cfg, RngStream& init_rng);

  // Greedy actor output; with explore, Gaussian noise or (with probability
  // random_eps) a uniform random action, clamped to bounds.
  Tensor act(const Tensor& state_goal, bool explore, RngStream& rng);

  // Feeds the observation normalizer (training rollouts only).
  void observe(const Tensor& state_goal);

  // y = clip(r + gamma * Q_target(s', pi_target(s')), [-1/(1-gamma), 0])
  std::vector<double> critic_target_value(const std::vector<Transition>& batch);

  TrainStats train_step(const std::vector<Transition>& batch);

  // theta_target <- tau * theta + (1 - tau) * theta_target
  void soft_update(double tau);
  void soft_update() { soft_update(cfg_.tau); }

  // Fills actor gradients for loss -mean Q(s, pi(s)) without stepping;
  // returns that mean Q. Exposed for gradient verification.
  double accumulate_actor_gradients(const std::vector<Transition>& batch);

  Network& actor() { return actor_; }
  Network& critic() { return critic_; }
  Network& actor_target() { return actor_target_; }
  Network& critic_target() { return critic_target_; }
  RunningNormalizer& normalizer() { return norm_; }
  const DdpgConfig& config() const { return cfg_; }

  // Four network checkpoints plus a JSON sidecar (hyperparameters +
  // normalizer state) in `dir`.
  void save(const std::string& dir) const;
  static DdpgAgent load(const std::string& dir, const GoalEnvSpec& env_spec);

 private:
  Tensor policy(Network& actor_net, const Tensor& normalized_sg);
  Tensor maybe_normalize(const Tensor& sg) const;

  GoalEnvSpec env_spec_;
  DdpgConfig cfg_;
  Network actor_, critic_, actor_target_, critic_target_;
  Optimizer actor_opt_, critic_opt_;
  RunningNormalizer norm_;
};

}  // namespace rankher
