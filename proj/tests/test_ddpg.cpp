#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "rankher/ddpg.hpp"
#include "rankher/env.hpp"
#include "rankher/her.hpp"

using namespace rankher;
using nn::Tensor;

namespace {

GoalEnvSpec wide_spec() {
  GoalEnvSpec s;
  s.name = "synthetic";
  s.state_dim = 3;
  s.action_dim = 2;
  s.goal_dim = 1;
  s.horizon = 5;
  s.action_lo = {-10, -10};
  s.action_hi = {10, 10};
  s.success_epsilon = 0.1;
  s.workspace_diameter = 1.0;
  return s;
}

std::vector<Transition> reach_batch(std::size_t count, std::uint64_t seed) {
  auto env = make_env("planar_reach");
  RngStream er(seed, "env"), ar(seed, "action-noise");
  std::vector<Transition> batch;
  while (batch.size() < count) {
    Episode ep;
    ep.episode_id = static_cast<int>(batch.size());
    auto [s, g] = env->reset(er);
    ep.desired_goal = g;
    ep.states.push_back(s);
    ep.achieved.push_back(env->achieved_goal(s));
    while (!env->done()) {
      Tensor a = Tensor::vec({ar.uniform(-1, 1), ar.uniform(-1, 1)});
      auto r = env->step(a);
      ep.actions.push_back(a);
      ep.rewards.push_back(r.reward);
      ep.states.push_back(r.next_state);
      ep.achieved.push_back(r.achieved_goal);
    }
    for (int t = 0; t < ep.steps() && batch.size() < count; ++t)
      batch.push_back(original_transition(ep, t));
  }
  return batch;
}

std::vector<double> collect_params(Network& net) {
  std::vector<double> out;
  net.for_each_param([&](Tensor& w, Tensor&) {
    out.insert(out.end(), w.data.begin(), w.data.end());
  });
  return out;
}

void fill_params(Network& net, double v) {
  net.for_each_param([&](Tensor& w, Tensor&) { w.fill(v); });
}

// Forward-only replication of the actor objective for finite differencing.
double mean_q_forward(DdpgAgent& agent, const std::vector<Transition>& batch,
                      const GoalEnvSpec& spec) {
  double total = 0;
  for (const auto& tr : batch) {
    const Tensor& z = agent.actor().forward(tr.state_goal);
    Tensor a = Tensor::zeros({spec.action_dim});
    for (std::size_t i = 0; i < a.numel(); ++i) {
      const double mid = 0.5 * (spec.action_lo[i] + spec.action_hi[i]);
      const double half = 0.5 * (spec.action_hi[i] - spec.action_lo[i]);
      a.data[i] = mid + half * std::tanh(z.data[i]);
    }
    total += agent.critic().forward(concat(tr.state_goal, a)).data[0];
  }
  return total / static_cast<double>(batch.size());
}

}  // namespace

TEST_CASE("act: greedy action is deterministic") {
  auto spec = make_env("planar_reach")->spec();
  DdpgConfig cfg;
  RngStream init(1, "init"), noise(1, "action-noise");
  DdpgAgent agent(spec, cfg, init);
  Tensor sg = Tensor::vec({0.2, 0.3, 0.7, 0.7});
  Tensor a1 = agent.act(sg, false, noise);
  Tensor a2 = agent.act(sg, false, noise);
  CHECK(a1.data == a2.data);
  for (double v : a1.data) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("act: zero noise and zero random chance equals greedy") {
  auto spec = make_env("planar_reach")->spec();
  DdpgConfig cfg;
  cfg.noise_sigma = 0.0;
  cfg.random_eps = 0.0;
  RngStream init(2, "init"), noise(2, "action-noise");
  DdpgAgent agent(spec, cfg, init);
  Tensor sg = Tensor::vec({0.5, 0.5, 0.2, 0.9});
  CHECK(agent.act(sg, true, noise).data == agent.act(sg, false, noise).data);
}

TEST_CASE("act: exploration noise std matches sigma within 10 percent") {
  DdpgConfig cfg;
  cfg.normalize = false;
  cfg.random_eps = 0.0;
  cfg.noise_sigma = 0.2;
  RngStream init(3, "init"), noise(3, "action-noise");
  DdpgAgent agent(wide_spec(), cfg, init);  // bounds +-10: the clamp never bites
  Tensor sg = Tensor::vec({0.1, -0.4, 0.9, 0.3});
  Tensor greedy = agent.act(sg, false, noise);
  const int n = 10000;
  std::vector<double> sumsq(2, 0.0);
  for (int i = 0; i < n; ++i) {
    Tensor a = agent.act(sg, true, noise);
    for (int d = 0; d < 2; ++d) {
      const double diff = a.data[d] - greedy.data[d];
      sumsq[d] += diff * diff;
    }
  }
  for (int d = 0; d < 2; ++d) {
    const double std_est = std::sqrt(sumsq[d] / n);
    CHECK(std_est > 0.18);
    CHECK(std_est < 0.22);
  }
}

TEST_CASE("act: random-action chance replaces the whole action") {
  DdpgConfig cfg;
  cfg.normalize = false;
  cfg.random_eps = 1.0;  // always the uniform branch
  RngStream init(4, "init"), noise(4, "action-noise");
  DdpgAgent agent(wide_spec(), cfg, init);
  Tensor sg = Tensor::vec({0, 0, 0, 0});
  double mn = 1e9, mx = -1e9;
  for (int i = 0; i < 2000; ++i) {
    Tensor a = agent.act(sg, true, noise);
    for (double v : a.data) {
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
  }
  CHECK(mn < -8.0);  // uniform over [-10,10] reaches the edges
  CHECK(mx > 8.0);
}

TEST_CASE("critic_target_value: gamma 0 returns the rewards") {
  auto spec = make_env("planar_reach")->spec();
  DdpgConfig cfg;
  cfg.gamma = 0.0;
  RngStream init(5, "init");
  DdpgAgent agent(spec, cfg, init);
  auto batch = reach_batch(16, 5);
  auto ys = agent.critic_target_value(batch);
  for (std::size_t i = 0; i < batch.size(); ++i) CHECK(ys[i] == batch[i].reward);
}

TEST_CASE("critic_target_value: zero target net and zero reward give zero") {
  auto spec = make_env("planar_reach")->spec();
  DdpgConfig cfg;
  RngStream init(6, "init");
  DdpgAgent agent(spec, cfg, init);
  fill_params(agent.critic_target(), 0.0);
  auto batch = reach_batch(4, 6);
  for (auto& tr : batch) tr.reward = 0.0;
  for (double y : agent.critic_target_value(batch)) CHECK(y == 0.0);
}

TEST_CASE("critic_target_value: matches an independent recomputation") {
  auto spec = make_env("planar_reach")->spec();
  DdpgConfig cfg;
  cfg.normalize = false;
  RngStream init(7, "init");
  DdpgAgent agent(spec, cfg, init);
  auto batch = reach_batch(32, 7);
  auto ys = agent.critic_target_value(batch);
  const double clip_lo = -1.0 / (1.0 - cfg.gamma);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Tensor& z = agent.actor_target().forward(batch[i].next_state_goal);
    Tensor a = Tensor::zeros({2});
    for (int d = 0; d < 2; ++d) a.data[d] = std::tanh(z.data[d]);
    const double q =
        agent.critic_target().forward(concat(batch[i].next_state_goal, a)).data[0];
    const double y = std::clamp(batch[i].reward + cfg.gamma * q, clip_lo, 0.0);
    CHECK(ys[i] == doctest::Approx(y).epsilon(1e-14));
    CHECK(ys[i] <= 0.0);
    CHECK(ys[i] >= clip_lo);
  }
}

TEST_CASE("train_step: critic loss decreases on a frozen batch") {
  auto spec = make_env("planar_reach")->spec();
  DdpgConfig cfg;
  cfg.normalize = false;
  RngStream init(8, "init");
  DdpgAgent agent(spec, cfg, init);
  auto batch = reach_batch(32, 8);
  const double first = agent.train_step(batch).critic_loss;
  double last = first;
  for (int i = 0; i < 99; ++i) last = agent.train_step(batch).critic_loss;
  CHECK(last < first * 0.5);
}

TEST_CASE("train_step: actor gradient matches finite differences") {
  auto spec = make_env("planar_reach")->spec();
  DdpgConfig cfg;
  cfg.normalize = false;
  cfg.hidden = {8};
  RngStream init(9, "init");
  DdpgAgent agent(spec, cfg, init);
  auto batch = reach_batch(4, 9);

  agent.accumulate_actor_gradients(batch);
  std::vector<double> analytic;
  agent.actor().for_each_param([&](Tensor&, Tensor& g) {
    // objective is -mean Q, so the ascent direction is the negation
    for (double v : g.data) analytic.push_back(-v);
  });

  std::vector<Tensor*> params;
  agent.actor().for_each_param([&](Tensor& w, Tensor&) { params.push_back(&w); });
  const double eps = 1e-5;
  std::size_t flat = 0;
  double max_rel = 0;
  for (Tensor* w : params) {
    for (std::size_t i = 0; i < w->numel(); ++i, ++flat) {
      const double orig = w->data[i];
      w->data[i] = orig + eps;
      const double fp = mean_q_forward(agent, batch, spec);
      w->data[i] = orig - eps;
      const double fm = mean_q_forward(agent, batch, spec);
      w->data[i] = orig;
      const double numeric = (fp - fm) / (2 * eps);
      const double rel = std::abs(analytic[flat] - numeric) /
                         std::max({std::abs(analytic[flat]), std::abs(numeric), 1e-12});
      max_rel = std::max(max_rel, rel);
    }
  }
  CHECK(max_rel < 1e-4);
}

TEST_CASE("train_step: empty batch rejected") {
  auto spec = make_env("planar_reach")->spec();
  DdpgConfig cfg;
  RngStream init(10, "init");
  DdpgAgent agent(spec, cfg, init);
  std::vector<Transition> empty;
  CHECK_THROWS_AS(agent.train_step(empty), std::invalid_argument);
  CHECK_THROWS_AS(agent.critic_target_value(empty), std::invalid_argument);
}

TEST_CASE("train_step: non-finite loss aborts with a diagnostic") {
  auto spec = make_env("planar_reach")->spec();
  DdpgConfig cfg;
  RngStream init(11, "init");
  DdpgAgent agent(spec, cfg, init);
  auto batch = reach_batch(8, 11);
  batch[3].reward = std::nan("");
  CHECK_THROWS_AS(agent.train_step(batch), std::runtime_error);
}

TEST_CASE("train_step: zero learning rates leave parameters unchanged") {
  auto spec = make_env("planar_reach")->spec();
  DdpgConfig cfg;
  cfg.actor_lr = 0.0;
  cfg.critic_lr = 0.0;
  RngStream init(12, "init");
  DdpgAgent agent(spec, cfg, init);
  auto before_a = collect_params(agent.actor());
  auto before_c = collect_params(agent.critic());
  agent.train_step(reach_batch(16, 12));
  CHECK(collect_params(agent.actor()) == before_a);
  CHECK(collect_params(agent.critic()) == before_c);
}

TEST_CASE("train_step: identical seeds give identical stat sequences") {
  auto spec = make_env("planar_reach")->spec();
  auto run = [&] {
    DdpgConfig cfg;
    RngStream init(13, "init");
    DdpgAgent agent(spec, cfg, init);
    auto batch = reach_batch(16, 13);
    std::vector<double> stats;
    for (int i = 0; i < 5; ++i) {
      auto s = agent.train_step(batch);
      stats.push_back(s.critic_loss);
      stats.push_back(s.actor_loss);
      stats.push_back(s.mean_q);
    }
    return stats;
  };
  CHECK(run() == run());
}

TEST_CASE("train_step: parameters stay finite") {
  auto spec = make_env("planar_reach")->spec();
  DdpgConfig cfg;
  RngStream init(14, "init");
  DdpgAgent agent(spec, cfg, init);
  for (int i = 0; i < 20; ++i) agent.train_step(reach_batch(16, 14 + i));
  for (Network* net : {&agent.actor(), &agent.critic()}) {
    net->for_each_param([](Tensor& w, Tensor&) {
      for (double v : w.data) CHECK(std::isfinite(v));
    });
  }
}

TEST_CASE("soft_update: tau 1 copies the mains bitwise") {
  auto spec = make_env("planar_reach")->spec();
  DdpgConfig cfg;
  RngStream init(15, "init");
  DdpgAgent agent(spec, cfg, init);
  agent.train_step(reach_batch(16, 15));  // drift mains away from targets
  agent.soft_update(1.0);
  CHECK(collect_params(agent.actor()) == collect_params(agent.actor_target()));
  CHECK(collect_params(agent.critic()) == collect_params(agent.critic_target()));
}

TEST_CASE("soft_update: tau 0.5 twice lands at three quarters") {
  auto spec = make_env("planar_reach")->spec();
  DdpgConfig cfg;
  RngStream init(16, "init");
  DdpgAgent agent(spec, cfg, init);
  fill_params(agent.actor(), 1.0);
  fill_params(agent.actor_target(), 0.0);
  agent.soft_update(0.5);
  agent.soft_update(0.5);
  agent.actor_target().for_each_param([](Tensor& w, Tensor&) {
    for (double v : w.data) CHECK(v == doctest::Approx(0.75));
  });
}

TEST_CASE("soft_update: frozen mains converge geometrically at rate 1-tau") {
  auto spec = make_env("planar_reach")->spec();
  DdpgConfig cfg;
  RngStream init(17, "init");
  DdpgAgent agent(spec, cfg, init);
  fill_params(agent.critic(), 1.0);
  fill_params(agent.critic_target(), 0.0);
  double prev_gap = 1.0;
  for (int i = 0; i < 6; ++i) {
    agent.soft_update(0.1);
    double gap = 0;
    agent.critic_target().for_each_param([&](Tensor& w, Tensor&) {
      if (!w.data.empty()) gap = 1.0 - w.data[0];
    });
    CHECK(gap / prev_gap == doctest::Approx(0.9).epsilon(1e-9));
    prev_gap = gap;
  }
  CHECK_THROWS_AS(agent.soft_update(0.0), std::invalid_argument);
}

TEST_CASE("normalizer: hand-computed mean and variance, clipped at 5") {
  RunningNormalizer norm(2);
  Tensor x = Tensor::vec({7.0, -3.0});
  CHECK(norm.normalize(x).data == x.data);  // identity before any data
  norm.observe(Tensor::vec({1.0, 2.0}));
  norm.observe(Tensor::vec({3.0, 4.0}));
  Tensor n = norm.normalize(Tensor::vec({3.0, 4.0}));
  CHECK(n.data[0] == doctest::Approx(1.0));  // (3-2)/1
  CHECK(n.data[1] == doctest::Approx(1.0));  // (4-3)/1
  Tensor far = norm.normalize(Tensor::vec({1000.0, -1000.0}));
  CHECK(far.data[0] == 5.0);
  CHECK(far.data[1] == -5.0);
  CHECK_THROWS_AS(norm.observe(Tensor::vec({1.0})), std::invalid_argument);
}

TEST_CASE("checkpoint: save/load reproduces behavior and state") {
  namespace fs = std::filesystem;
  auto spec = make_env("planar_reach")->spec();
  DdpgConfig cfg;
  cfg.hidden = {16, 16};
  RngStream init(18, "init");
  DdpgAgent agent(spec, cfg, init);
  for (const auto& tr : reach_batch(40, 18)) agent.observe(tr.state_goal);
  agent.train_step(reach_batch(16, 19));
  const std::string dir = "agent_ckpt_test";
  agent.save(dir);
  DdpgAgent loaded = DdpgAgent::load(dir, spec);
  RngStream n1(1, "action-noise"), n2(1, "action-noise");
  Tensor sg = Tensor::vec({0.4, 0.6, 0.3, 0.8});
  CHECK(agent.act(sg, false, n1).data == loaded.act(sg, false, n2).data);
  CHECK(loaded.normalizer().count() == agent.normalizer().count());
  CHECK(loaded.config().hidden == cfg.hidden);
  auto batch = reach_batch(8, 20);
  CHECK(agent.critic_target_value(batch) == loaded.critic_target_value(batch));
  fs::remove_all(dir);
}

TEST_CASE("config validation rejects out-of-range settings") {
  DdpgConfig cfg;
  cfg.gamma = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = DdpgConfig{};
  cfg.tau = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = DdpgConfig{};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
