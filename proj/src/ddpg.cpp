#include "rankher/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "rankher/her.hpp"

namespace rankher {

using json = nlohmann::json;

void DdpgConfig::validate() const {
  if (hidden.empty()) throw std::invalid_argument("ddpg needs at least one hidden layer");
  if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma must be in [0,1)");
  if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("tau must be in (0,1]");
  if (actor_lr < 0.0 || critic_lr < 0.0)
    throw std::invalid_argument("learning rates must be nonnegative");
  if (noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be nonnegative");
  if (random_eps < 0.0 || random_eps > 1.0)
    throw std::invalid_argument("random_eps must be in [0,1]");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
}

RunningNormalizer::RunningNormalizer(std::size_t dim)
    : sum_(Tensor::zeros({dim})), sumsq_(Tensor::zeros({dim})) {}

void RunningNormalizer::observe(const Tensor& x) {
  if (x.numel() != sum_.numel())
    throw std::invalid_argument("normalizer dimension mismatch");
  for (std::size_t i = 0; i < x.numel(); ++i) {
    sum_.data[i] += x.data[i];
    sumsq_.data[i] += x.data[i] * x.data[i];
  }
  ++count_;
}

Tensor RunningNormalizer::normalize(const Tensor& x) const {
  if (x.numel() != sum_.numel())
    throw std::invalid_argument("normalizer dimension mismatch");
  if (count_ == 0) return x;
  Tensor out = x;
  const double n = static_cast<double>(count_);
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double mean = sum_.data[i] / n;
    const double var = std::max(sumsq_.data[i] / n - mean * mean, 1e-8);
    out.data[i] = std::clamp((x.data[i] - mean) / std::sqrt(var), -5.0, 5.0);
  }
  return out;
}

void RunningNormalizer::restore(Tensor sum, Tensor sumsq, std::uint64_t count) {
  if (sum.numel() != sumsq.numel())
    throw std::invalid_argument("normalizer state tensors disagree");
  sum_ = std::move(sum);
  sumsq_ = std::move(sumsq);
  count_ = count;
}

namespace {

std::vector<std::size_t> mlp_dims(std::size_t in, const std::vector<std::size_t>& hidden,
                                  std::size_t out) {
  std::vector<std::size_t> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v))
    throw std::runtime_error(std::string("training diverged: non-finite ") + what +
                             " (check learning rates and initialization)");
}

}  // namespace

DdpgAgent::DdpgAgent(const GoalEnvSpec& env_spec, const DdpgConfig& cfg,
                     RngStream& init_rng)
    : env_spec_(env_spec),
      cfg_(cfg),
      actor_(nn::mlp(mlp_dims(env_spec.state_dim + env_spec.goal_dim, cfg.hidden,
                              env_spec.action_dim))),
      critic_(nn::mlp(mlp_dims(env_spec.state_dim + env_spec.goal_dim +
                                   env_spec.action_dim,
                               cfg.hidden, 1))),
      actor_opt_(Optimizer::adam(cfg.actor_lr)),
      critic_opt_(Optimizer::adam(cfg.critic_lr)),
      norm_(env_spec.state_dim + env_spec.goal_dim) {
  cfg_.validate();
  actor_.init_uniform(init_rng);
  critic_.init_uniform(init_rng);
  actor_target_ = actor_;
  critic_target_ = critic_;
}

Tensor DdpgAgent::maybe_normalize(const Tensor& sg) const {
  return cfg_.normalize ? norm_.normalize(sg) : sg;
}

Tensor DdpgAgent::policy(Network& actor_net, const Tensor& normalized_sg) {
  const Tensor& z = actor_net.forward(normalized_sg);
  Tensor a = Tensor::zeros({env_spec_.action_dim});
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double mid = 0.5 * (env_spec_.action_lo[i] + env_spec_.action_hi[i]);
    const double half = 0.5 * (env_spec_.action_hi[i] - env_spec_.action_lo[i]);
    a.data[i] = mid + half * std::tanh(z.data[i]);
  }
  return a;
}

void DdpgAgent::observe(const Tensor& state_goal) { norm_.observe(state_goal); }

Tensor DdpgAgent::act(const Tensor& state_goal, bool explore, RngStream& rng) {
  if (state_goal.numel() != env_spec_.state_dim + env_spec_.goal_dim)
    throw std::invalid_argument("act: state||goal dimension mismatch");
  Tensor a = policy(actor_, maybe_normalize(state_goal));
  if (explore) {
    if (rng.uniform() < cfg_.random_eps) {
      for (std::size_t i = 0; i < a.numel(); ++i)
        a.data[i] = rng.uniform(env_spec_.action_lo[i], env_spec_.action_hi[i]);
    } else {
      for (std::size_t i = 0; i < a.numel(); ++i)
        a.data[i] += rng.gaussian(0.0, cfg_.noise_sigma);
    }
  }
  for (std::size_t i = 0; i < a.numel(); ++i)
    a.data[i] = std::clamp(a.data[i], env_spec_.action_lo[i], env_spec_.action_hi[i]);
  return a;
}

std::vector<double> DdpgAgent::critic_target_value(
    const std::vector<Transition>& batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const double clip_lo = -1.0 / (1.0 - cfg_.gamma);
  std::vector<double> ys;
  ys.reserve(batch.size());
  for (const Transition& tr : batch) {
    Tensor nsg = maybe_normalize(tr.next_state_goal);
    Tensor a2 = policy(actor_target_, nsg);
    const double q = critic_target_.forward(concat(nsg, a2)).data[0];
    ys.push_back(std::clamp(tr.reward + cfg_.gamma * q, clip_lo, 0.0));
  }
  return ys;
}

double DdpgAgent::accumulate_actor_gradients(const std::vector<Transition>& batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const double scale = 1.0 / static_cast<double>(batch.size());
  const std::size_t sg_dim = env_spec_.state_dim + env_spec_.goal_dim;
  actor_.zero_grads();
  double mean_q = 0.0;
  for (const Transition& tr : batch) {
    Tensor nsg = maybe_normalize(tr.state_goal);
    const Tensor z = actor_.forward(nsg);  // copied; actor caches stay valid
    Tensor a = Tensor::zeros({env_spec_.action_dim});
    for (std::size_t i = 0; i < a.numel(); ++i) {
      const double mid = 0.5 * (env_spec_.action_lo[i] + env_spec_.action_hi[i]);
      const double half = 0.5 * (env_spec_.action_hi[i] - env_spec_.action_lo[i]);
      a.data[i] = mid + half * std::tanh(z.data[i]);
    }
    mean_q += critic_.forward(concat(nsg, a)).data[0] * scale;
    // loss is -mean Q; chain its critic input-gradient through the squash
    Tensor gin = critic_.backward(Tensor::vec({-scale}));
    Tensor gz = Tensor::zeros({env_spec_.action_dim});
    for (std::size_t i = 0; i < gz.numel(); ++i) {
      const double half = 0.5 * (env_spec_.action_hi[i] - env_spec_.action_lo[i]);
      const double th = std::tanh(z.data[i]);
      gz.data[i] = gin.data[sg_dim + i] * half * (1.0 - th * th);
    }
    actor_.backward(gz);
  }
  return mean_q;
}

TrainStats DdpgAgent::train_step(const std::vector<Transition>& batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const auto ys = critic_target_value(batch);

  // actor first: its chain rule runs through the critic, whose parameter
  // gradients from this pass are discarded before the critic's own update
  const double mean_q = accumulate_actor_gradients(batch);
  actor_opt_.step(actor_);
  critic_.zero_grads();

  const double scale = 1.0 / static_cast<double>(batch.size());
  double critic_loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Tensor nsg = maybe_normalize(batch[i].state_goal);
    const double q = critic_.forward(concat(nsg, batch[i].action)).data[0];
    const double diff = q - ys[i];
    critic_loss += diff * diff * scale;
    critic_.backward(Tensor::vec({2.0 * diff * scale}));
  }
  critic_opt_.step(critic_);

  TrainStats stats;
  stats.critic_loss = critic_loss;
  stats.actor_loss = -mean_q;
  stats.mean_q = mean_q;
  stats.batch_size = batch.size();
  check_finite(stats.critic_loss, "critic loss");
  check_finite(stats.actor_loss, "actor loss");
  return stats;
}

void DdpgAgent::soft_update(double tau) {
  if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("tau must be in (0,1]");
  auto blend = [tau](Network& main, Network& target) {
    std::vector<Tensor*> mp, tp;
    main.for_each_param([&](Tensor& w, Tensor&) { mp.push_back(&w); });
    target.for_each_param([&](Tensor& w, Tensor&) { tp.push_back(&w); });
    for (std::size_t i = 0; i < mp.size(); ++i) {
      for (std::size_t j = 0; j < mp[i]->numel(); ++j) {
        if (tau == 1.0)
          tp[i]->data[j] = mp[i]->data[j];
        else
          tp[i]->data[j] = tau * mp[i]->data[j] + (1.0 - tau) * tp[i]->data[j];
      }
    }
  };
  blend(actor_, actor_target_);
  blend(critic_, critic_target_);
}

void DdpgAgent::save(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nn::save_network(actor_, dir + "/actor.ckpt");
  nn::save_network(critic_, dir + "/critic.ckpt");
  nn::save_network(actor_target_, dir + "/actor_target.ckpt");
  nn::save_network(critic_target_, dir + "/critic_target.ckpt");
  json j;
  j["hidden"] = cfg_.hidden;
  j["gamma"] = cfg_.gamma;
  j["tau"] = cfg_.tau;
  j["actor_lr"] = cfg_.actor_lr;
  j["critic_lr"] = cfg_.critic_lr;
  j["noise_sigma"] = cfg_.noise_sigma;
  j["random_eps"] = cfg_.random_eps;
  j["batch_size"] = cfg_.batch_size;
  j["normalize"] = cfg_.normalize;
  j["normalizer"] = {{"count", norm_.count()},
                     {"sum", norm_.sum().data},
                     {"sumsq", norm_.sumsq().data}};
  std::ofstream os(dir + "/agent.json");
  if (!os) throw std::runtime_error("cannot write agent sidecar in " + dir);
  os << j.dump(2) << "\n";
}

DdpgAgent DdpgAgent::load(const std::string& dir, const GoalEnvSpec& env_spec) {
  std::ifstream is(dir + "/agent.json");
  if (!is) throw std::runtime_error("cannot read agent sidecar in " + dir);
  json j = json::parse(is);
  DdpgConfig cfg;
  cfg.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  cfg.gamma = j.at("gamma").get<double>();
  cfg.tau = j.at("tau").get<double>();
  cfg.actor_lr = j.at("actor_lr").get<double>();
  cfg.critic_lr = j.at("critic_lr").get<double>();
  cfg.noise_sigma = j.at("noise_sigma").get<double>();
  cfg.random_eps = j.at("random_eps").get<double>();
  cfg.batch_size = j.at("batch_size").get<std::size_t>();
  cfg.normalize = j.at("normalize").get<bool>();
  RngStream dummy(0);
  DdpgAgent agent(env_spec, cfg, dummy);
  agent.actor_ = nn::load_network(dir + "/actor.ckpt");
  agent.critic_ = nn::load_network(dir + "/critic.ckpt");
  agent.actor_target_ = nn::load_network(dir + "/actor_target.ckpt");
  agent.critic_target_ = nn::load_network(dir + "/critic_target.ckpt");
  const auto& n = j.at("normalizer");
  std::vector<double> sum = n.at("sum").get<std::vector<double>>();
  std::vector<double> sumsq = n.at("sumsq").get<std::vector<double>>();
  agent.norm_.restore(Tensor({sum.size()}, sum), Tensor({sumsq.size()}, sumsq),
                      n.at("count").get<std::uint64_t>());
  return agent;
}

}  // namespace rankher
