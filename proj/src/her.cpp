#include "rankher/her.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rankher {

void HerConfig::validate() const {
  if (k < 1) throw std::invalid_argument("her k must be at least 1");
  if (rank_threshold < 0 || rank_threshold > 4)
    throw std::invalid_argument("rank_threshold must be in 0..4");
}

HerConfig::Strategy parse_strategy(const std::string& s) {
  if (s == "final") return HerConfig::Strategy::final_state;
  if (s == "future") return HerConfig::Strategy::future;
  throw std::invalid_argument("unknown replay strategy: " + s);
}

std::string strategy_name(HerConfig::Strategy s) {
  return s == HerConfig::Strategy::final_state ? "final" : "future";
}

double rank_distance(const TerminalSummary& summary, const GoalEnvSpec& spec) {
  if (spec.has_hinge) return summary.ee_handle_distance;
  double s = 0;
  for (std::size_t i = 0; i < spec.goal_dim; ++i) {
    const double d = summary.final_achieved_goal.data[i] - summary.desired_goal.data[i];
    s += d * d;
  }
  return std::sqrt(s);
}

int distance_band(double d, double workspace_diameter) {
  const int g = 1 + static_cast<int>(std::floor(4.0 * d / workspace_diameter));
  return std::clamp(g, 1, 4);
}

EpisodeRank oracle_rank(const TerminalSummary& summary, const GoalEnvSpec& spec) {
  EpisodeRank r;
  r.source = RankSource::oracle;
  const bool success = (spec.has_hinge && summary.hinge_angle > kOpenThreshold) ||
                       summary.final_reward == 0.0;
  if (success) {
    r.group = 0;
    return r;
  }
  r.group = distance_band(rank_distance(summary, spec), spec.workspace_diameter);
  return r;
}

EpisodeRank cnn_rank(const RenderedImage& image, Network& ranker) {
  const Tensor& probs = ranker.forward(image.to_tensor());
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.numel(); ++i)
    if (probs.data[i] > probs.data[best]) best = i;  // ties keep the lower group
  EpisodeRank r;
  r.group = static_cast<int>(best);
  r.source = RankSource::cnn;
  return r;
}

std::vector<std::pair<int, Tensor>> select_goals(const Episode& ep,
                                                 const HerConfig& cfg,
                                                 RngStream& rng) {
  cfg.validate();
  const int T = ep.steps();
  std::vector<std::pair<int, Tensor>> out;
  if (cfg.strategy == HerConfig::Strategy::final_state) {
    for (int t = 0; t < T; ++t) out.emplace_back(t, ep.achieved[T]);
    return out;
  }
  // future strategy: pool for step t holds the goals achieved by steps after
  // t, i.e. achieved-state indices t+2 .. T; draw up to k without replacement
  for (int t = 0; t < T; ++t) {
    std::vector<int> pool;
    for (int idx = t + 2; idx <= T; ++idx) pool.push_back(idx);
    const std::size_t m = std::min<std::size_t>(cfg.k, pool.size());
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t pick = j + rng.uniform_index(pool.size() - j);
      std::swap(pool[j], pool[pick]);
      out.emplace_back(t, ep.achieved[pool[j]]);
    }
  }
  return out;
}

Tensor concat(const Tensor& a, const Tensor& b) {
  Tensor out = Tensor::zeros({a.numel() + b.numel()});
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + a.numel());
  return out;
}

Transition relabel(const Transition& tr, const Tensor& new_goal,
                   const GoalEnv& env) {
  const std::size_t gd = env.spec().goal_dim;
  if (new_goal.numel() != gd)
    throw std::invalid_argument("relabel goal has wrong dimension");
  if (tr.state_goal.numel() < gd || tr.next_state_goal.numel() < gd)
    throw std::invalid_argument("transition state fields shorter than the goal");
  Transition out = tr;
  const std::size_t off1 = out.state_goal.numel() - gd;
  const std::size_t off2 = out.next_state_goal.numel() - gd;
  for (std::size_t i = 0; i < gd; ++i) {
    out.state_goal.data[off1 + i] = new_goal.data[i];
    out.next_state_goal.data[off2 + i] = new_goal.data[i];
  }
  out.reward = env.compute_reward(tr.achieved_goal_next, new_goal);
  return out;
}

Transition original_transition(const Episode& ep, int t) {
  if (t < 0 || t >= ep.steps()) throw std::out_of_range("episode step out of range");
  Transition tr;
  tr.state_goal = concat(ep.states[t], ep.desired_goal);
  tr.action = ep.actions[t];
  tr.reward = ep.rewards[t];
  tr.next_state_goal = concat(ep.states[t + 1], ep.desired_goal);
  tr.achieved_goal_next = ep.achieved[t + 1];
  tr.episode_id = ep.episode_id;
  tr.t = t;
  tr.hindsight = false;
  return tr;
}

int filter_and_store(const Episode& ep, const EpisodeRank& rank,
                     const HerConfig& cfg, ReplayBuffer& buffer,
                     const GoalEnv& env, RngStream& rng) {
  cfg.validate();
  const int T = ep.steps();
  int stored = 0;
  for (int t = 0; t < T; ++t) {
    buffer.push(original_transition(ep, t));
    ++stored;
  }
  auto goals = select_goals(ep, cfg, rng);
  if (cfg.filter_enabled && rank.group > cfg.rank_threshold) return stored;
  for (const auto& [t, goal] : goals) {
    Transition tr = relabel(original_transition(ep, t), goal, env);
    tr.hindsight = true;
    buffer.push(std::move(tr));
    ++stored;
  }
  return stored;
}

RankLedger::RankLedger(const std::string& path) : out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open rank ledger: " + path);
  out_ << "episode_id,group,source,hinge_angle,distance\n";
}

void RankLedger::append(int episode_id, const EpisodeRank& rank,
                        const TerminalSummary& summary, const GoalEnvSpec& spec) {
  if (!out_.is_open()) return;
  char line[160];
  std::snprintf(line, sizeof(line), "%d,%d,%s,%.9f,%.9f\n", episode_id, rank.group,
                rank.source == RankSource::oracle ? "oracle" : "cnn",
                summary.hinge_angle, rank_distance(summary, spec));
  out_ << line;
}

}  // namespace rankher
