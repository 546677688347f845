#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rankher/ddpg.hpp"
#include "rankher/env.hpp"
#include "rankher/her.hpp"

namespace rankher {

// Training arm. `ddpg` stores originals only (no hindsight); `her` relabels
// without filtering; the er arms filter hindsight by episode rank, judged by
// the oracle or by the image classifier.
enum class Variant { ddpg, her, er_oracle, er_cnn };

Variant parse_variant(const std::string& s);
std::string variant_name(Variant v);

struct ExperimentConfig {
  std::string env = "door_push_1d";
  Variant variant = Variant::her;
  HerConfig her;
  DdpgConfig ddpg;
  std::size_t epochs = 30;
  std::size_t episodes_per_epoch = 50;
  std::size_t optimization_steps = 40;  // per episode batch
  std::size_t eval_episodes = 20;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string ranker_checkpoint;  // required by the er-cnn arm
  std::size_t buffer_capacity = 1000000;
  std::size_t render_size = 32;
  double workspace_diameter = 0.0;  // 0 keeps the environment default
  bool write_logs = true;

  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<double> success_rates;  // per epoch, from greedy evaluation only
};

// One seed of the full training loop: per episode a noisy rollout, episode
// ranking, filtered hindsight storage and N optimization steps plus a target
// update; per epoch a greedy evaluation pass. With a nonempty out_dir writes
// config.json and - when epochs > 0 - the episode log, rank ledger and the
// per-seed curve CSV.
RunResult run_training(const ExperimentConfig& cfg, std::uint64_t seed,
                       const std::string& out_dir);

struct LearningCurve {
  std::string variant;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<double>> raw;  // [seed index][epoch]
  std::vector<double> median;            // [epoch]
  int epochs_to_90 = -1;                 // 1-based; -1 when never reached
};

// First 1-based epoch from which the series stays >= threshold for
// `consecutive` epochs (the whole window must fit); -1 when absent.
int epochs_to_threshold(const std::vector<double>& series, double threshold,
                        int consecutive);

LearningCurve aggregate_curve(const std::string& variant,
                              const std::vector<std::uint64_t>& seeds,
                              std::vector<std::vector<double>> raw);

struct SpeedupEntry {
  std::string variant;
  double speedup = 0.0;  // baseline epochs-to-90 / variant epochs-to-90
  bool defined = false;  // both sides reached the threshold
};

struct ComparisonReport {
  std::vector<LearningCurve> curves;
  std::string baseline;  // the her arm when present, else the first variant
  std::vector<SpeedupEntry> speedups;
  std::vector<std::string> failures;  // "variant: reason"
};

// Runs every variant over the same seed list (paired streams), aggregates
// medians and epochs-to-90%, and writes curves.csv / curves_median.csv /
// curves.svg / report.json under out_dir (when nonempty). A failing variant
// is recorded and skipped.
ComparisonReport compare_variants(const ExperimentConfig& base,
                                  const std::vector<Variant>& variants,
                                  const std::string& out_dir);

void emit_report(const std::vector<LearningCurve>& curves,
                 const std::string& out_dir);

// Rebuilds per-variant curves from a raw `variant,seed,epoch,success_rate`
// CSV (the emit_report schema).
std::vector<LearningCurve> curves_from_raw_csv(const std::string& path);

std::string render_svg(const std::vector<LearningCurve>& curves);

}  // namespace rankher
