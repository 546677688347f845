#include "rankher/episode_log.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace rankher {

using json = nlohmann::json;

LoggedEpisode to_logged(const Episode& ep, std::uint64_t seed,
                        const std::string& env_name) {
  LoggedEpisode out;
  out.episode_id = ep.episode_id;
  out.seed = seed;
  out.env = env_name;
  out.transitions.reserve(static_cast<std::size_t>(ep.steps()));
  for (int t = 0; t < ep.steps(); ++t) {
    LoggedTransition tr;
    tr.s = ep.states[static_cast<std::size_t>(t)].data;
    tr.a = ep.actions[static_cast<std::size_t>(t)].data;
    tr.r = ep.rewards[static_cast<std::size_t>(t)];
    tr.s_next = ep.states[static_cast<std::size_t>(t) + 1].data;
    out.transitions.push_back(std::move(tr));
  }
  out.summary = ep.summary;
  return out;
}

void append_episode(std::ostream& os, const LoggedEpisode& ep) {
  json jt = json::array();
  for (const auto& tr : ep.transitions)
    jt.push_back({{"s", tr.s}, {"a", tr.a}, {"r", tr.r}, {"s_next", tr.s_next}});
  json j{{"episode_id", ep.episode_id},
         {"seed", ep.seed},
         {"env", ep.env},
         {"transitions", std::move(jt)},
         {"summary",
          {{"hinge_angle", ep.summary.hinge_angle},
           {"distance", ep.summary.ee_handle_distance},
           {"achieved", ep.summary.final_achieved_goal.data},
           {"desired", ep.summary.desired_goal.data},
           {"final_reward", ep.summary.final_reward}}}};
  os << j.dump() << "\n";
}

std::vector<LoggedEpisode> read_episode_log(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open episode log " + path);
  std::vector<LoggedEpisode> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      LoggedEpisode ep;
      ep.episode_id = j.at("episode_id").get<int>();
      ep.seed = j.at("seed").get<std::uint64_t>();
      ep.env = j.at("env").get<std::string>();
      for (const auto& jt : j.at("transitions")) {
        LoggedTransition tr;
        tr.s = jt.at("s").get<std::vector<double>>();
        tr.a = jt.at("a").get<std::vector<double>>();
        tr.r = jt.at("r").get<double>();
        tr.s_next = jt.at("s_next").get<std::vector<double>>();
        ep.transitions.push_back(std::move(tr));
      }
      const auto& js = j.at("summary");
      ep.summary.hinge_angle = js.at("hinge_angle").get<double>();
      ep.summary.ee_handle_distance = js.at("distance").get<double>();
      ep.summary.final_achieved_goal =
          Tensor::vec(js.at("achieved").get<std::vector<double>>());
      ep.summary.desired_goal =
          Tensor::vec(js.at("desired").get<std::vector<double>>());
      ep.summary.final_reward = js.at("final_reward").get<double>();
      out.push_back(std::move(ep));
    } catch (const json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": bad episode record: " + e.what());
    }
  }
  return out;
}

}  // namespace rankher
