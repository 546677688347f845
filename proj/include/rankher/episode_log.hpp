#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rankher/env.hpp"

namespace rankher {

// One line of an episode log, the on-disk form a finished rollout takes.
// Training runs append these as JSONL; dataset generation replays them.
struct LoggedTransition {
  std::vector<double> s;
  std::vector<double> a;
  double r = 0.0;
  std::vector<double> s_next;
};

struct LoggedEpisode {
  int episode_id = 0;
  std::uint64_t seed = 0;
  std::string env;
  std::vector<LoggedTransition> transitions;
  TerminalSummary summary;
};

LoggedEpisode to_logged(const Episode& ep, std::uint64_t seed,
                        const std::string& env_name);

// Writes one compact JSON object per line.
void append_episode(std::ostream& os, const LoggedEpisode& ep);

// Parses a whole log; errors name the file and line.
std::vector<LoggedEpisode> read_episode_log(const std::string& path);

}  // namespace rankher
