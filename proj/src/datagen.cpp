#include "rankher/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "rankher/episode_log.hpp"
#include "rankher/her.hpp"
#include "rankher/image.hpp"
#include "rankher/losses.hpp"
#include "rankher/optimizer.hpp"
#include "rankher/rng.hpp"

namespace rankher {

namespace fs = std::filesystem;
using json = nlohmann::json;
using nn::LossResult;
using nn::Optimizer;

std::string encode_filename(int episode_id, double distance, bool open) {
  if (episode_id < 0) throw std::invalid_argument("episode_id must be nonnegative");
  if (!(distance >= 0.0) || !std::isfinite(distance))
    throw std::invalid_argument("distance must be a finite nonnegative number");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%d_%.4f%s.pgm", episode_id, distance,
                open ? "O" : "");
  return buf;
}

DecodedName decode_filename(const std::string& filename) {
  const auto slash = filename.find_last_of('/');
  const std::string name =
      slash == std::string::npos ? filename : filename.substr(slash + 1);
  const auto fail = [&name]() {
    throw std::invalid_argument("cannot parse image filename '" + name + "'");
  };
  std::size_t i = 0;
  const auto digits = [&](std::size_t at_least) {
    const std::size_t start = i;
    while (i < name.size() && std::isdigit(static_cast<unsigned char>(name[i]))) ++i;
    if (i - start < at_least) fail();
    return name.substr(start, i - start);
  };
  const std::string id_part = digits(1);
  if (i >= name.size() || name[i] != '_') fail();
  ++i;
  const std::size_t dist_start = i;
  digits(1);
  if (i >= name.size() || name[i] != '.') fail();
  ++i;
  const std::size_t frac_start = i;
  digits(1);
  if (i - frac_start != 4) fail();  // exactly four decimals
  const std::string dist_part = name.substr(dist_start, i - dist_start);
  bool open = false;
  if (i < name.size() && name[i] == 'O') {
    open = true;
    ++i;
  }
  if (name.substr(i) != ".pgm") fail();
  DecodedName d;
  try {
    d.episode_id = std::stoi(id_part);
  } catch (const std::out_of_range&) {
    fail();
  }
  d.distance = std::strtod(dist_part.c_str(), nullptr);
  d.open = open;
  return d;
}

int decode_and_classify(const std::string& filename, const GoalEnvSpec& spec) {
  const DecodedName d = decode_filename(filename);
  return d.open ? 0 : distance_band(d.distance, spec.workspace_diameter);
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
  json entries = json::array();
  for (const auto& e : m.entries)
    entries.push_back({{"file", e.file}, {"group", e.group}, {"split", e.split}});
  json j{{"seed", m.seed},
         {"env", m.env},
         {"render_size", m.render_size},
         {"group_counts", m.group_counts},
         {"entries", std::move(entries)}};
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write manifest " + path);
  os << j.dump(2) << "\n";
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read manifest " + path);
  json j = json::parse(is);
  DatasetManifest m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.env = j.at("env").get<std::string>();
  m.render_size = j.at("render_size").get<std::size_t>();
  m.group_counts = j.at("group_counts").get<std::array<int, 5>>();
  for (const auto& je : j.at("entries")) {
    ManifestEntry e;
    e.file = je.at("file").get<std::string>();
    e.group = je.at("group").get<int>();
    e.split = je.at("split").get<std::string>();
    m.entries.push_back(std::move(e));
  }
  return m;
}

namespace {

double quantize4(double d) { return std::round(d * 1e4) / 1e4; }

}  // namespace

DatasetManifest generate_dataset(const std::vector<std::string>& log_files,
                                 GoalEnv& env, const std::string& out_dir,
                                 std::uint64_t seed) {
  if (!env.spec().has_hinge)
    throw std::invalid_argument(
        "dataset generation requires the door task: terminal images must "
        "encode the hinge state");
  fs::create_directories(out_dir);
  // the directory is owned artifact space: stale images would corrupt scans
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.path().extension() == ".pgm" || name == "manifest.json")
      fs::remove(entry.path());
  }

  RngStream split_rng(seed, "split");
  DatasetManifest m;
  m.seed = seed;
  m.env = env.spec().name;
  m.render_size = env.render_size();
  int next_id = 0;
  for (const auto& file : log_files) {
    for (const auto& ep : read_episode_log(file)) {
      if (ep.env != env.spec().name)
        throw std::invalid_argument("log " + file + " records env '" + ep.env +
                                    "' but dataset generation runs on '" +
                                    env.spec().name + "'");
      if (ep.transitions.empty())
        throw std::runtime_error("log " + file + " has an episode with no steps");
      // quantize to filename precision first so the decoded label always
      // reproduces the group recorded here, even at band edges
      TerminalSummary sum = ep.summary;
      sum.ee_handle_distance = quantize4(sum.ee_handle_distance);
      const EpisodeRank rank = oracle_rank(sum, env.spec());
      const std::string name =
          encode_filename(next_id, sum.ee_handle_distance, rank.group == 0);
      const Tensor final_state = Tensor::vec(ep.transitions.back().s_next);
      write_pgm(env.render_terminal(final_state), out_dir + "/" + name);
      const double u = split_rng.uniform();
      const std::string split =
          u < 0.7 ? "train" : (u < 0.85 ? "validation" : "test");
      m.entries.push_back({name, rank.group, split});
      ++m.group_counts[static_cast<std::size_t>(rank.group)];
      ++next_id;
    }
  }
  save_manifest(m, out_dir + "/manifest.json");
  return m;
}

void RankerTrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (samples_per_epoch < batch_size)
    throw std::invalid_argument("samples_per_epoch must cover at least one batch");
}

int ConfusionMatrix::total() const {
  int n = 0;
  for (const auto& row : counts)
    for (int c : row) n += c;
  return n;
}

double ConfusionMatrix::accuracy() const {
  const int n = total();
  if (n == 0) return 0.0;
  int diag = 0;
  for (std::size_t g = 0; g < counts.size(); ++g) diag += counts[g][g];
  return static_cast<double>(diag) / static_cast<double>(n);
}

namespace {

struct Sample {
  RenderedImage image;
  int group;
};

std::vector<Sample> load_split(const DatasetManifest& manifest,
                               const std::string& image_dir,
                               const std::string& split) {
  std::vector<Sample> out;
  for (const auto& e : manifest.entries) {
    if (e.split != split) continue;
    if (e.group < 0 || e.group > 4)
      throw std::invalid_argument("manifest entry " + e.file +
                                  " has group outside 0..4");
    out.push_back({read_pgm(image_dir + "/" + e.file), e.group});
  }
  return out;
}

RankerEvalReport eval_samples(Network& net, const std::vector<Sample>& samples) {
  RankerEvalReport report;
  for (const auto& s : samples) {
    const int pred = cnn_rank(s.image, net).group;
    ++report.confusion.counts[static_cast<std::size_t>(s.group)]
                             [static_cast<std::size_t>(pred)];
  }
  report.count = samples.size();
  report.accuracy = report.confusion.accuracy();
  return report;
}

}  // namespace

RankerTrainResult train_ranker(const DatasetManifest& manifest,
                               const std::string& image_dir,
                               const std::string& preset,
                               const RankerTrainConfig& cfg) {
  cfg.validate();
  Network net;
  if (preset == "desk")
    net = nn::conv_classifier_desk(5);
  else if (preset == "paper")
    net = nn::conv_classifier_full(5);
  else
    throw std::invalid_argument("unknown ranker preset '" + preset +
                                "' (expected desk or paper)");

  const auto train = load_split(manifest, image_dir, "train");
  if (train.empty()) throw std::invalid_argument("manifest has no training images");
  std::array<bool, 5> in_dataset{}, in_train{};
  for (const auto& e : manifest.entries)
    in_dataset[static_cast<std::size_t>(e.group)] = true;
  for (const auto& s : train) in_train[static_cast<std::size_t>(s.group)] = true;
  for (std::size_t g = 0; g < 5; ++g)
    if (in_dataset[g] && !in_train[g])
      throw std::invalid_argument("group " + std::to_string(g) +
                                  " has no training images; refusing to train");

  // small datasets may leave holdout splits empty; fall back so validation
  // and test always evaluate on something
  auto val = load_split(manifest, image_dir, "validation");
  if (val.empty()) val = train;
  auto test = load_split(manifest, image_dir, "test");
  if (test.empty()) test = val;

  RngStream init_rng(cfg.seed, "ranker-init");
  net.init_uniform(init_rng);
  RngStream batch_rng(cfg.seed, "ranker-batch");
  Optimizer opt = Optimizer::sgd(cfg.lr);

  RankerTrainResult result;
  result.net = net;
  const std::size_t batches =
      std::max<std::size_t>(1, cfg.samples_per_epoch / cfg.batch_size);
  const double inv_batch = 1.0 / static_cast<double>(cfg.batch_size);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      net.zero_grads();
      double batch_loss = 0.0;
      for (std::size_t s = 0; s < cfg.batch_size; ++s) {
        const Sample& sample = train[batch_rng.uniform_index(train.size())];
        const Tensor& probs = net.forward(sample.image.to_tensor());
        for (double p : probs.data)
          if (!std::isfinite(p))
            throw std::runtime_error("ranker training diverged at epoch " +
                                     std::to_string(epoch));
        LossResult loss = nn::loss_categorical_crossentropy(
            probs, static_cast<std::size_t>(sample.group));
        batch_loss += loss.value * inv_batch;
        for (double& g : loss.grad.data) g *= inv_batch;
        net.backward_from_logits(loss.grad);
      }
      opt.step(net);
      loss_sum += batch_loss;
    }
    const double epoch_loss = loss_sum / static_cast<double>(batches);
    if (!std::isfinite(epoch_loss))
      throw std::runtime_error("ranker training diverged at epoch " +
                               std::to_string(epoch));
    const double val_acc = eval_samples(net, val).accuracy;
    result.train_loss.push_back(epoch_loss);
    result.val_accuracy.push_back(val_acc);
    if (val_acc > result.best_val_accuracy || epoch == 1) {
      result.best_val_accuracy = val_acc;
      result.best_epoch = epoch;
      result.net = net;
    }
  }

  result.test = eval_samples(result.net, test);
  if (!cfg.report_path.empty()) {
    std::ofstream os(cfg.report_path);
    if (!os) throw std::runtime_error("cannot write report " + cfg.report_path);
    os << "epoch,train_loss,val_acc\n";
    char buf[96];
    for (std::size_t e = 0; e < result.train_loss.size(); ++e) {
      std::snprintf(buf, sizeof(buf), "%zu,%.9f,%.9f\n", e + 1,
                    result.train_loss[e], result.val_accuracy[e]);
      os << buf;
    }
  }
  if (!cfg.checkpoint_path.empty()) nn::save_network(result.net, cfg.checkpoint_path);
  return result;
}

RankerEvalReport evaluate_ranker(Network& net, const DatasetManifest& manifest,
                                 const std::string& image_dir,
                                 const std::string& split) {
  if (split != "train" && split != "validation" && split != "test")
    throw std::invalid_argument("unknown split '" + split + "'");
  const auto samples = load_split(manifest, image_dir, split);
  if (samples.empty())
    throw std::invalid_argument("split '" + split + "' is empty");
  return eval_samples(net, samples);
}

}  // namespace rankher
