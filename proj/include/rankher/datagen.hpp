#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rankher/env.hpp"
#include "rankher/network.hpp"

namespace rankher {

using nn::Network;

// Filename label scheme for terminal images: the effector-object distance
// (4 fixed decimals) plus an 'O' marker on opened/successful episodes, with
// an episode-id prefix so equal distances cannot collide.
std::string encode_filename(int episode_id, double distance, bool open);

struct DecodedName {
  int episode_id = 0;
  double distance = 0.0;
  bool open = false;
};

// Inverse of encode_filename; a leading directory part is ignored.
// Malformed names raise std::invalid_argument quoting the name.
DecodedName decode_filename(const std::string& filename);

// Group 0 when the name carries the open marker, else the distance band.
int decode_and_classify(const std::string& filename, const GoalEnvSpec& spec);

struct ManifestEntry {
  std::string file;
  int group = 0;
  std::string split;  // "train" | "validation" | "test"
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::string env;
  std::size_t render_size = 0;
  std::array<int, 5> group_counts{};
  std::vector<ManifestEntry> entries;
};

void save_manifest(const DatasetManifest& m, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

// Replays episode logs through the environment renderer: one labeled PGM per
// episode plus manifest.json in out_dir, with a deterministic 70/15/15
// train/validation/test split keyed by the seed. Requires the door task
// (terminal images must encode hinge state).
DatasetManifest generate_dataset(const std::vector<std::string>& log_files,
                                 GoalEnv& env, const std::string& out_dir,
                                 std::uint64_t seed);

struct RankerTrainConfig {
  std::size_t batch_size = 16;
  double lr = 0.001;
  std::size_t epochs = 500;
  std::size_t samples_per_epoch = 1000;  // drawn with replacement
  std::uint64_t seed = 0;
  std::string report_path;      // optional CSV: epoch,train_loss,val_acc
  std::string checkpoint_path;  // optional best-validation network dump
  void validate() const;
};

struct ConfusionMatrix {
  std::array<std::array<int, 5>, 5> counts{};  // [true group][predicted]
  int total() const;
  double accuracy() const;  // exact-match fraction
};

struct RankerEvalReport {
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  std::size_t count = 0;
};

struct RankerTrainResult {
  Network net;  // weights of the best validation epoch
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
  RankerEvalReport test;
  std::vector<double> train_loss;    // per epoch
  std::vector<double> val_accuracy;  // per epoch
};

// Trains the 5-group classifier ("desk" or "paper" architecture preset) on
// the manifest's train split, tracking validation accuracy per epoch and
// reporting the best checkpoint's confusion on the test split. Refuses
// manifests whose train split misses a group that appears elsewhere.
RankerTrainResult train_ranker(const DatasetManifest& manifest,
                               const std::string& image_dir,
                               const std::string& preset,
                               const RankerTrainConfig& cfg);

RankerEvalReport evaluate_ranker(Network& net, const DatasetManifest& manifest,
                                 const std::string& image_dir,
                                 const std::string& split);

}  // namespace rankher
