#include "rankher/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "rankher/episode_log.hpp"
#include "rankher/replay.hpp"

namespace rankher {

namespace fs = std::filesystem;
using json = nlohmann::json;

Variant parse_variant(const std::string& s) {
  if (s == "ddpg") return Variant::ddpg;
  if (s == "her") return Variant::her;
  if (s == "er-oracle") return Variant::er_oracle;
  if (s == "er-cnn") return Variant::er_cnn;
  throw std::invalid_argument("unknown variant '" + s +
                              "' (expected ddpg, her, er-oracle or er-cnn)");
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::ddpg: return "ddpg";
    case Variant::her: return "her";
    case Variant::er_oracle: return "er-oracle";
    case Variant::er_cnn: return "er-cnn";
  }
  throw std::logic_error("unreachable variant");
}

void ExperimentConfig::validate() const {
  if (env.empty()) throw std::invalid_argument("env must be set");
  if (episodes_per_epoch == 0)
    throw std::invalid_argument("episodes_per_epoch must be positive");
  if (eval_episodes == 0) throw std::invalid_argument("eval_episodes must be positive");
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  if (buffer_capacity == 0) throw std::invalid_argument("buffer_capacity must be positive");
  if (variant == Variant::er_cnn && ranker_checkpoint.empty())
    throw std::invalid_argument("the er-cnn variant needs a ranker checkpoint");
  if (workspace_diameter < 0.0)
    throw std::invalid_argument("workspace_diameter must be nonnegative");
  her.validate();
  ddpg.validate();
}

json ExperimentConfig::to_json() const {
  return json{{"env", env},
              {"variant", variant_name(variant)},
              {"her",
               {{"strategy", strategy_name(her.strategy)},
                {"k", her.k},
                {"rank_threshold", her.rank_threshold},
                {"filter_enabled", her.filter_enabled}}},
              {"ddpg",
               {{"hidden", ddpg.hidden},
                {"gamma", ddpg.gamma},
                {"tau", ddpg.tau},
                {"actor_lr", ddpg.actor_lr},
                {"critic_lr", ddpg.critic_lr},
                {"noise_sigma", ddpg.noise_sigma},
                {"random_eps", ddpg.random_eps},
                {"batch_size", ddpg.batch_size},
                {"normalize", ddpg.normalize}}},
              {"epochs", epochs},
              {"episodes_per_epoch", episodes_per_epoch},
              {"optimization_steps", optimization_steps},
              {"eval_episodes", eval_episodes},
              {"seeds", seeds},
              {"ranker_checkpoint", ranker_checkpoint},
              {"buffer_capacity", buffer_capacity},
              {"render_size", render_size},
              {"workspace_diameter", workspace_diameter},
              {"write_logs", write_logs}};
}

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char* k : known) ok |= key == k;
    if (!ok)
      throw std::invalid_argument("unknown config key '" + key + "' in " + where);
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  reject_unknown_keys(
      j,
      {"env", "variant", "her", "ddpg", "epochs", "episodes_per_epoch",
       "optimization_steps", "eval_episodes", "seeds", "ranker_checkpoint",
       "buffer_capacity", "render_size", "workspace_diameter", "write_logs"},
      "experiment config");
  ExperimentConfig cfg;
  if (j.contains("env")) cfg.env = j.at("env").get<std::string>();
  if (j.contains("variant"))
    cfg.variant = parse_variant(j.at("variant").get<std::string>());
  if (j.contains("her")) {
    const json& h = j.at("her");
    reject_unknown_keys(h, {"strategy", "k", "rank_threshold", "filter_enabled"},
                        "her config");
    if (h.contains("strategy"))
      cfg.her.strategy = parse_strategy(h.at("strategy").get<std::string>());
    if (h.contains("k")) cfg.her.k = h.at("k").get<int>();
    if (h.contains("rank_threshold"))
      cfg.her.rank_threshold = h.at("rank_threshold").get<int>();
    if (h.contains("filter_enabled"))
      cfg.her.filter_enabled = h.at("filter_enabled").get<bool>();
  }
  if (j.contains("ddpg")) {
    const json& d = j.at("ddpg");
    reject_unknown_keys(d,
                        {"hidden", "gamma", "tau", "actor_lr", "critic_lr",
                         "noise_sigma", "random_eps", "batch_size", "normalize"},
                        "ddpg config");
    if (d.contains("hidden"))
      cfg.ddpg.hidden = d.at("hidden").get<std::vector<std::size_t>>();
    if (d.contains("gamma")) cfg.ddpg.gamma = d.at("gamma").get<double>();
    if (d.contains("tau")) cfg.ddpg.tau = d.at("tau").get<double>();
    if (d.contains("actor_lr")) cfg.ddpg.actor_lr = d.at("actor_lr").get<double>();
    if (d.contains("critic_lr")) cfg.ddpg.critic_lr = d.at("critic_lr").get<double>();
    if (d.contains("noise_sigma"))
      cfg.ddpg.noise_sigma = d.at("noise_sigma").get<double>();
    if (d.contains("random_eps"))
      cfg.ddpg.random_eps = d.at("random_eps").get<double>();
    if (d.contains("batch_size"))
      cfg.ddpg.batch_size = d.at("batch_size").get<std::size_t>();
    if (d.contains("normalize")) cfg.ddpg.normalize = d.at("normalize").get<bool>();
  }
  if (j.contains("epochs")) cfg.epochs = j.at("epochs").get<std::size_t>();
  if (j.contains("episodes_per_epoch"))
    cfg.episodes_per_epoch = j.at("episodes_per_epoch").get<std::size_t>();
  if (j.contains("optimization_steps"))
    cfg.optimization_steps = j.at("optimization_steps").get<std::size_t>();
  if (j.contains("eval_episodes"))
    cfg.eval_episodes = j.at("eval_episodes").get<std::size_t>();
  if (j.contains("seeds"))
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("ranker_checkpoint"))
    cfg.ranker_checkpoint = j.at("ranker_checkpoint").get<std::string>();
  if (j.contains("buffer_capacity"))
    cfg.buffer_capacity = j.at("buffer_capacity").get<std::size_t>();
  if (j.contains("render_size"))
    cfg.render_size = j.at("render_size").get<std::size_t>();
  if (j.contains("workspace_diameter"))
    cfg.workspace_diameter = j.at("workspace_diameter").get<double>();
  if (j.contains("write_logs")) cfg.write_logs = j.at("write_logs").get<bool>();
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot read config " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return from_json(j);
}

namespace {

Episode rollout(GoalEnv& env, DdpgAgent& agent, RngStream& env_rng,
                RngStream& noise_rng, int id, bool explore) {
  Episode ep;
  ep.episode_id = id;
  auto [s, g] = env.reset(env_rng);
  ep.desired_goal = g;
  ep.states.push_back(s);
  ep.achieved.push_back(env.achieved_goal(s));
  while (!env.done()) {
    const Tensor sg = concat(env.state(), env.desired());
    if (explore) agent.observe(sg);
    const Tensor a = agent.act(sg, explore, noise_rng);
    const StepResult r = env.step(a);
    ep.actions.push_back(a);
    ep.rewards.push_back(r.reward);
    ep.states.push_back(r.next_state);
    ep.achieved.push_back(r.achieved_goal);
  }
  ep.summary = env.terminal_summary();
  return ep;
}

}  // namespace

RunResult run_training(const ExperimentConfig& cfg, std::uint64_t seed,
                       const std::string& out_dir) {
  cfg.validate();
  auto env = make_env(cfg.env, cfg.render_size);
  auto eval_env = make_env(cfg.env, cfg.render_size);
  if (cfg.workspace_diameter > 0.0) {
    env->set_workspace_diameter(cfg.workspace_diameter);
    eval_env->set_workspace_diameter(cfg.workspace_diameter);
  }

  RngStream env_rng(seed, "env");
  RngStream eval_rng(seed, "eval_env");
  RngStream noise_rng(seed, "action-noise");
  RngStream her_rng(seed, "her");
  RngStream replay_rng(seed, "replay");
  RngStream init_rng(seed, "init");

  DdpgAgent agent(env->spec(), cfg.ddpg, init_rng);
  ReplayBuffer buffer(cfg.buffer_capacity);
  Network ranker;
  if (cfg.variant == Variant::er_cnn) ranker = nn::load_network(cfg.ranker_checkpoint);

  HerConfig her = cfg.her;
  if (cfg.variant == Variant::her) her.filter_enabled = false;

  std::ofstream episode_os;
  RankLedger ledger;
  const std::string seed_tag = std::to_string(seed);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream cfg_os(out_dir + "/config.json");
    if (!cfg_os) throw std::runtime_error("cannot write into " + out_dir);
    cfg_os << cfg.to_json().dump(2) << "\n";
    if (cfg.epochs > 0 && cfg.write_logs) {
      episode_os.open(out_dir + "/episodes_seed" + seed_tag + ".jsonl");
      ledger = RankLedger(out_dir + "/ranks_seed" + seed_tag + ".csv");
    }
  }

  RunResult result;
  result.seed = seed;
  int episode_id = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t e = 0; e < cfg.episodes_per_epoch; ++e, ++episode_id) {
      const Episode ep = rollout(*env, agent, env_rng, noise_rng, episode_id, true);
      EpisodeRank rank;
      if (cfg.variant == Variant::er_cnn)
        rank = cnn_rank(env->render_terminal(ep.states.back()), ranker);
      else
        rank = oracle_rank(ep.summary, env->spec());
      if (cfg.variant == Variant::ddpg) {
        for (int t = 0; t < ep.steps(); ++t) buffer.push(original_transition(ep, t));
      } else {
        filter_and_store(ep, rank, her, buffer, *env, her_rng);
      }
      ledger.append(episode_id, rank, ep.summary, env->spec());
      if (episode_os.is_open())
        append_episode(episode_os, to_logged(ep, seed, cfg.env));

      if (buffer.size() >= cfg.ddpg.batch_size && cfg.optimization_steps > 0) {
        try {
          for (std::size_t n = 0; n < cfg.optimization_steps; ++n)
            agent.train_step(buffer.sample_batch(cfg.ddpg.batch_size, replay_rng));
        } catch (const std::runtime_error& ex) {
          throw std::runtime_error("seed " + seed_tag + " epoch " +
                                   std::to_string(epoch + 1) + ": " + ex.what());
        }
        agent.soft_update();
      }
    }

    int successes = 0;
    for (std::size_t v = 0; v < cfg.eval_episodes; ++v) {
      const Episode ev = rollout(*eval_env, agent, eval_rng, noise_rng, -1, false);
      if (ev.rewards.back() == 0.0) ++successes;
    }
    result.success_rates.push_back(static_cast<double>(successes) /
                                   static_cast<double>(cfg.eval_episodes));
  }

  if (!out_dir.empty() && cfg.epochs > 0) {
    std::ofstream curve(out_dir + "/curve_seed" + seed_tag + ".csv");
    curve << "variant,seed,epoch,success_rate\n";
    char buf[96];
    for (std::size_t i = 0; i < result.success_rates.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%s,%llu,%zu,%.6f\n",
                    variant_name(cfg.variant).c_str(),
                    static_cast<unsigned long long>(seed), i + 1,
                    result.success_rates[i]);
      curve << buf;
    }
  }
  return result;
}

int epochs_to_threshold(const std::vector<double>& series, double threshold,
                        int consecutive) {
  if (consecutive <= 0) throw std::invalid_argument("consecutive must be positive");
  const std::size_t need = static_cast<std::size_t>(consecutive);
  if (series.size() < need) return -1;
  for (std::size_t i = 0; i + need <= series.size(); ++i) {
    bool held = true;
    for (std::size_t j = i; j < i + need; ++j) held &= series[j] >= threshold;
    if (held) return static_cast<int>(i) + 1;
  }
  return -1;
}

LearningCurve aggregate_curve(const std::string& variant,
                              const std::vector<std::uint64_t>& seeds,
                              std::vector<std::vector<double>> raw) {
  if (raw.empty()) throw std::invalid_argument("aggregate_curve needs raw rates");
  if (raw.size() != seeds.size())
    throw std::invalid_argument("one raw series per seed required");
  const std::size_t epochs = raw.front().size();
  for (const auto& r : raw)
    if (r.size() != epochs)
      throw std::invalid_argument("raw series disagree on epoch count");
  LearningCurve curve;
  curve.variant = variant;
  curve.seeds = seeds;
  curve.raw = std::move(raw);
  curve.median.reserve(epochs);
  std::vector<double> column(curve.raw.size());
  for (std::size_t e = 0; e < epochs; ++e) {
    for (std::size_t s = 0; s < curve.raw.size(); ++s) column[s] = curve.raw[s][e];
    std::sort(column.begin(), column.end());
    const std::size_t n = column.size();
    curve.median.push_back(n % 2 == 1
                               ? column[n / 2]
                               : 0.5 * (column[n / 2 - 1] + column[n / 2]));
  }
  curve.epochs_to_90 = epochs_to_threshold(curve.median, 0.9, 3);
  return curve;
}

ComparisonReport compare_variants(const ExperimentConfig& base,
                                  const std::vector<Variant>& variants,
                                  const std::string& out_dir) {
  if (variants.empty()) throw std::invalid_argument("no variants to compare");
  if (base.seeds.size() < 3)
    throw std::invalid_argument("a comparison needs at least 3 seeds");
  ComparisonReport report;
  for (const Variant v : variants) {
    ExperimentConfig cfg = base;
    cfg.variant = v;
    const std::string name = variant_name(v);
    try {
      cfg.validate();
      std::vector<std::vector<double>> raw;
      for (const std::uint64_t seed : cfg.seeds) {
        std::string run_dir;
        if (!out_dir.empty())
          run_dir = out_dir + "/" + name + "/seed" + std::to_string(seed);
        raw.push_back(run_training(cfg, seed, run_dir).success_rates);
      }
      report.curves.push_back(aggregate_curve(name, cfg.seeds, std::move(raw)));
    } catch (const std::exception& ex) {
      report.failures.push_back(name + ": " + ex.what());
    }
  }
  if (report.curves.empty()) return report;

  report.baseline = report.curves.front().variant;
  for (const auto& c : report.curves)
    if (c.variant == "her") {
      report.baseline = "her";
      break;
    }
  int baseline_epochs = -1;
  for (const auto& c : report.curves)
    if (c.variant == report.baseline) {
      baseline_epochs = c.epochs_to_90;
      break;
    }
  for (const auto& c : report.curves) {
    SpeedupEntry entry;
    entry.variant = c.variant;
    if (baseline_epochs > 0 && c.epochs_to_90 > 0) {
      entry.speedup = static_cast<double>(baseline_epochs) /
                      static_cast<double>(c.epochs_to_90);
      entry.defined = true;
    }
    report.speedups.push_back(entry);
  }

  if (!out_dir.empty()) {
    emit_report(report.curves, out_dir);
    json jv = json::array();
    for (const auto& c : report.curves) {
      const SpeedupEntry* sp = nullptr;
      for (const auto& s : report.speedups)
        if (s.variant == c.variant && (sp == nullptr)) sp = &s;
      jv.push_back({{"variant", c.variant},
                    {"epochs_to_90", c.epochs_to_90},
                    {"speedup", sp != nullptr && sp->defined ? json(sp->speedup)
                                                             : json(nullptr)}});
    }
    json j{{"baseline", report.baseline},
           {"variants", std::move(jv)},
           {"failures", report.failures}};
    std::ofstream os(out_dir + "/report.json");
    if (!os) throw std::runtime_error("cannot write report.json in " + out_dir);
    os << j.dump(2) << "\n";
  }
  return report;
}

void emit_report(const std::vector<LearningCurve>& curves,
                 const std::string& out_dir) {
  if (curves.empty()) throw std::invalid_argument("no curves to report");
  fs::create_directories(out_dir);
  char buf[128];

  std::ofstream raw(out_dir + "/curves.csv");
  if (!raw) throw std::runtime_error("cannot write into " + out_dir);
  raw << "variant,seed,epoch,success_rate\n";
  for (const auto& c : curves)
    for (std::size_t s = 0; s < c.raw.size(); ++s)
      for (std::size_t e = 0; e < c.raw[s].size(); ++e) {
        std::snprintf(buf, sizeof(buf), "%s,%llu,%zu,%.6f\n", c.variant.c_str(),
                      static_cast<unsigned long long>(c.seeds[s]), e + 1,
                      c.raw[s][e]);
        raw << buf;
      }

  std::ofstream med(out_dir + "/curves_median.csv");
  med << "variant,epoch,median\n";
  for (const auto& c : curves)
    for (std::size_t e = 0; e < c.median.size(); ++e) {
      std::snprintf(buf, sizeof(buf), "%s,%zu,%.6f\n", c.variant.c_str(), e + 1,
                    c.median[e]);
      med << buf;
    }

  std::ofstream svg(out_dir + "/curves.svg");
  svg << render_svg(curves);
}

std::vector<LearningCurve> curves_from_raw_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(is, line) || line != "variant,seed,epoch,success_rate")
    throw std::runtime_error(path + ": expected header variant,seed,epoch,success_rate");

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::uint64_t>> seeds_of;
  std::map<std::string, std::map<std::uint64_t, std::vector<std::pair<std::size_t, double>>>>
      rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string variant, seed_s, epoch_s, rate_s;
    if (!std::getline(ss, variant, ',') || !std::getline(ss, seed_s, ',') ||
        !std::getline(ss, epoch_s, ',') || !std::getline(ss, rate_s))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad row");
    std::uint64_t seed = 0;
    std::size_t epoch = 0;
    double rate = 0.0;
    try {
      seed = std::stoull(seed_s);
      epoch = std::stoul(epoch_s);
      rate = std::stod(rate_s);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad row");
    }
    if (rows.find(variant) == rows.end()) order.push_back(variant);
    auto& per_seed = rows[variant];
    if (per_seed.find(seed) == per_seed.end()) seeds_of[variant].push_back(seed);
    per_seed[seed].push_back({epoch, rate});
  }

  std::vector<LearningCurve> curves;
  for (const auto& variant : order) {
    std::vector<std::vector<double>> raw;
    for (const std::uint64_t seed : seeds_of[variant]) {
      auto& pairs = rows[variant][seed];
      std::sort(pairs.begin(), pairs.end());
      std::vector<double> series;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].first != i + 1)
          throw std::runtime_error(path + ": epochs of " + variant + " seed " +
                                   std::to_string(seed) + " are not 1..N");
        series.push_back(pairs[i].second);
      }
      raw.push_back(std::move(series));
    }
    curves.push_back(aggregate_curve(variant, seeds_of[variant], std::move(raw)));
  }
  return curves;
}

namespace {

const char* curve_color(const std::string& variant, std::size_t index) {
  if (variant == "her") return "#1f77b4";
  if (variant == "er-oracle") return "#2ca02c";
  if (variant == "er-cnn") return "#d62728";
  if (variant == "ddpg") return "#7f7f7f";
  static const char* spare[] = {"#9467bd", "#8c564b", "#e377c2", "#bcbd22"};
  return spare[index % 4];
}

}  // namespace

std::string render_svg(const std::vector<LearningCurve>& curves) {
  if (curves.empty()) throw std::invalid_argument("no curves to plot");
  std::size_t epochs = 0;
  for (const auto& c : curves) epochs = std::max(epochs, c.median.size());
  const double x0 = 60, y0 = 360, x1 = 600, y1 = 30;
  const auto px = [&](std::size_t epoch) {  // 1-based epoch
    if (epochs <= 1) return x0;
    return x0 + (x1 - x0) * static_cast<double>(epoch - 1) /
                    static_cast<double>(epochs - 1);
  };
  const auto py = [&](double rate) { return y0 - (y0 - y1) * rate; };

  std::ostringstream svg;
  char buf[160];
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
         "viewBox=\"0 0 640 420\">\n";
  svg << "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  svg << "<line x1=\"60\" y1=\"360\" x2=\"600\" y2=\"360\" stroke=\"black\"/>\n";
  svg << "<line x1=\"60\" y1=\"360\" x2=\"60\" y2=\"30\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double rate = 0.25 * i;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"55\" y1=\"%.2f\" x2=\"60\" y2=\"%.2f\" "
                  "stroke=\"black\"/>\n",
                  py(rate), py(rate));
    svg << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"48\" y=\"%.2f\" font-size=\"12\" "
                  "text-anchor=\"end\" dominant-baseline=\"middle\">%.2f</text>\n",
                  py(rate), rate);
    svg << buf;
  }
  const std::size_t x_ticks = std::min<std::size_t>(epochs, 6);
  for (std::size_t i = 0; i < x_ticks; ++i) {
    const std::size_t epoch =
        x_ticks <= 1 ? 1 : 1 + i * (epochs - 1) / (x_ticks - 1);
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"360\" x2=\"%.2f\" y2=\"365\" "
                  "stroke=\"black\"/>\n",
                  px(epoch), px(epoch));
    svg << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.2f\" y=\"378\" font-size=\"12\" "
                  "text-anchor=\"middle\">%zu</text>\n",
                  px(epoch), epoch);
    svg << buf;
  }
  svg << "<text x=\"330\" y=\"400\" font-size=\"14\" "
         "text-anchor=\"middle\">epoch</text>\n";
  svg << "<text x=\"16\" y=\"195\" font-size=\"14\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 16 195)\">median success rate</text>\n";

  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const auto& c = curves[ci];
    if (c.median.empty()) continue;
    svg << "<polyline fill=\"none\" stroke=\"" << curve_color(c.variant, ci)
        << "\" stroke-width=\"2\" points=\"";
    for (std::size_t e = 0; e < c.median.size(); ++e) {
      std::snprintf(buf, sizeof(buf), "%s%.2f,%.2f", e == 0 ? "" : " ",
                    px(e + 1), py(c.median[e]));
      svg << buf;
    }
    svg << "\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"480\" y=\"%.2f\" width=\"18\" height=\"4\" "
                  "fill=\"%s\"/>\n",
                  40.0 + 18.0 * static_cast<double>(ci), curve_color(c.variant, ci));
    svg << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"504\" y=\"%.2f\" font-size=\"12\" "
                  "dominant-baseline=\"middle\">%s</text>\n",
                  42.0 + 18.0 * static_cast<double>(ci), c.variant.c_str());
    svg << buf;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace rankher
