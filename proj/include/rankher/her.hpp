#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "rankher/env.hpp"
#include "rankher/network.hpp"
#include "rankher/replay.hpp"
#include "rankher/rng.hpp"

namespace rankher {

using nn::Network;

// Hindsight replay settings plus the episode-rank filter.
struct HerConfig {
  enum class Strategy { final_state, future };
  Strategy strategy = Strategy::future;
  int k = 4;               // hindsight goals per transition (future strategy)
  int rank_threshold = 3;  // keep hindsight only from groups <= this
  bool filter_enabled = true;
  void validate() const;
};

HerConfig::Strategy parse_strategy(const std::string& s);
std::string strategy_name(HerConfig::Strategy s);

enum class RankSource { oracle, cnn };

// Episode quality group, 0 = best (success), 4 = worst.
struct EpisodeRank {
  int group = 0;
  RankSource source = RankSource::oracle;
};

// Hinge angle above which a door episode counts as opened.
constexpr double kOpenThreshold = 0.05;  // radians

// Group 0 on success (door opened past the threshold, or terminal reward 0);
// otherwise the distance quartile band of the workspace diameter, clamped to
// groups 1..4. Door tasks band the effector-handle distance, others the
// distance from the final achieved goal to the desired goal.
EpisodeRank oracle_rank(const TerminalSummary& summary, const GoalEnvSpec& spec);

// That distance, exposed so rank ledgers and dataset labels agree with the
// grouping above.
double rank_distance(const TerminalSummary& summary, const GoalEnvSpec& spec);

// Group from the distance alone (the non-success branch of oracle_rank).
int distance_band(double d, double workspace_diameter);

// Argmax of the classifier's softmax output; ties break toward the better
// (lower) group.
EpisodeRank cnn_rank(const RenderedImage& image, Network& ranker);

// Hindsight goal selection: (t, goal) pairs. Goals are achieved-goal values.
std::vector<std::pair<int, Tensor>> select_goals(const Episode& ep,
                                                 const HerConfig& cfg,
                                                 RngStream& rng);

Tensor concat(const Tensor& a, const Tensor& b);

// Replaces the goal slice of both state fields, recomputes the reward from
// achieved_goal_next, leaves everything else (including flags) untouched.
Transition relabel(const Transition& tr, const Tensor& new_goal,
                   const GoalEnv& env);

// Builds the original-goal transition for step t of an episode.
Transition original_transition(const Episode& ep, int t);

// Stores all original-goal transitions, then hindsight transitions unless the
// filter drops this episode's group. Goal selection always runs so rng
// consumption does not depend on the filter decision. Returns stored count.
int filter_and_store(const Episode& ep, const EpisodeRank& rank,
                     const HerConfig& cfg, ReplayBuffer& buffer,
                     const GoalEnv& env, RngStream& rng);

// Append-only CSV: episode_id,group,source,hinge_angle,distance
class RankLedger {
 public:
  RankLedger() = default;  // disabled ledger; append is a no-op
  explicit RankLedger(const std::string& path);
  void append(int episode_id, const EpisodeRank& rank,
              const TerminalSummary& summary, const GoalEnvSpec& spec);
  bool enabled() const { return out_.is_open(); }

 private:
  std::ofstream out_;
};

}  // namespace rankher
