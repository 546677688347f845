#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rankher/bench.hpp"
#include "rankher/datagen.hpp"
#include "rankher/network.hpp"

using namespace rankher;
namespace fs = std::filesystem;

namespace {

std::vector<Variant> parse_variant_list(const std::string& csv) {
  std::vector<Variant> out;
  std::stringstream ss(csv);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    if (piece.empty())
      throw std::invalid_argument("empty entry in variant list '" + csv + "'");
    out.push_back(parse_variant(piece));
  }
  if (out.empty()) throw std::invalid_argument("no variants requested");
  return out;
}

void print_curve_line(const LearningCurve& c) {
  if (c.epochs_to_90 > 0)
    std::printf("%-10s reaches 90%% at epoch %d", c.variant.c_str(), c.epochs_to_90);
  else
    std::printf("%-10s never holds 90%%", c.variant.c_str());
  if (!c.median.empty()) std::printf(" (final median %.3f)", c.median.back());
  std::printf("\n");
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  ExperimentConfig cfg = ExperimentConfig::load(config_path);
  std::vector<std::vector<double>> raw;
  for (std::uint64_t seed : cfg.seeds) {
    std::string run_dir;
    if (!out_dir.empty()) run_dir = out_dir + "/seed" + std::to_string(seed);
    RunResult r = run_training(cfg, seed, run_dir);
    std::printf("seed %llu: final success %.3f\n",
                static_cast<unsigned long long>(seed),
                r.success_rates.empty() ? 0.0 : r.success_rates.back());
    raw.push_back(std::move(r.success_rates));
  }
  if (cfg.epochs == 0) return 0;
  LearningCurve curve =
      aggregate_curve(variant_name(cfg.variant), cfg.seeds, std::move(raw));
  print_curve_line(curve);
  if (!out_dir.empty()) {
    emit_report({curve}, out_dir);
    std::printf("curves written to %s\n", out_dir.c_str());
  }
  return 0;
}

int cmd_compare(const std::string& config_path, const std::string& variants_csv,
                int seed_count, const std::string& out_dir) {
  ExperimentConfig cfg = ExperimentConfig::load(config_path);
  if (seed_count > 0) {
    cfg.seeds.clear();
    for (int s = 1; s <= seed_count; ++s) cfg.seeds.push_back(s);
  }
  const std::vector<Variant> variants = parse_variant_list(variants_csv);
  ComparisonReport report = compare_variants(cfg, variants, out_dir);
  for (const auto& failure : report.failures)
    std::fprintf(stderr, "failed: %s\n", failure.c_str());
  if (report.curves.empty())
    throw std::runtime_error("every variant failed; nothing to compare");

  std::printf("baseline: %s\n", report.baseline.c_str());
  for (const auto& c : report.curves) {
    print_curve_line(c);
    for (const auto& s : report.speedups)
      if (s.variant == c.variant && s.defined && c.variant != report.baseline)
        std::printf("%-10s speedup over %s: %.2fx\n", c.variant.c_str(),
                    report.baseline.c_str(), s.speedup);
  }
  if (!out_dir.empty()) std::printf("report written to %s\n", out_dir.c_str());
  return 0;
}

int cmd_plot(const std::string& in_path, const std::string& out_path) {
  std::vector<LearningCurve> curves;
  try {
    curves = curves_from_raw_csv(in_path);
  } catch (const std::runtime_error& e) {
    throw std::invalid_argument(e.what());
  }
  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw std::invalid_argument("cannot write " + out_path);
  os << render_svg(curves);
  std::printf("plotted %zu curve%s to %s\n", curves.size(),
              curves.size() == 1 ? "" : "s", out_path.c_str());
  return 0;
}

int cmd_datagen(const std::vector<std::string>& logs, const std::string& env_name,
                const std::string& out_dir, std::uint64_t seed,
                std::size_t render) {
  auto env = make_env(env_name, render);
  DatasetManifest m;
  try {
    m = generate_dataset(logs, *env, out_dir, seed);
  } catch (const std::runtime_error& e) {
    throw std::invalid_argument(e.what());
  }
  std::printf("%zu labeled images in %s (groups", m.entries.size(), out_dir.c_str());
  for (int g = 0; g < 5; ++g) std::printf(" %d:%d", g, m.group_counts[g]);
  std::printf(")\n");
  return 0;
}

int cmd_train_ranker(const std::string& manifest_path, const std::string& preset,
                     RankerTrainConfig tc) {
  DatasetManifest m;
  try {
    m = load_manifest(manifest_path);
  } catch (const std::runtime_error& e) {
    throw std::invalid_argument(e.what());
  }
  std::string image_dir = fs::path(manifest_path).parent_path().string();
  if (image_dir.empty()) image_dir = ".";
  if (tc.checkpoint_path.empty()) tc.checkpoint_path = image_dir + "/ranker.ckpt";

  RankerTrainResult res = train_ranker(m, image_dir, preset, tc);
  std::printf("best epoch %zu: validation accuracy %.3f\n", res.best_epoch,
              res.best_val_accuracy);
  std::printf("test accuracy %.3f over %zu images\n", res.test.accuracy,
              res.test.count);
  std::printf("confusion (rows = labeled group, columns = predicted):\n");
  for (int g = 0; g < 5; ++g) {
    std::printf("  %d:", g);
    for (int p = 0; p < 5; ++p) std::printf(" %4d", res.test.confusion.counts[g][p]);
    std::printf("\n");
  }
  std::printf("checkpoint written to %s\n", tc.checkpoint_path.c_str());
  return 0;
}

int cmd_describe(const std::string& path) {
  Network net;
  try {
    net = nn::load_network(path);
  } catch (const std::runtime_error& e) {
    throw std::invalid_argument(e.what());
  }
  std::fputs(nn::describe_network(net).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"goal-conditioned replay benchmark: ranked hindsight experience"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* run = app.add_subcommand("run", "train one variant across its seeds");
  run->add_option("--config", config_path, "experiment config JSON")->required();
  run->add_option("--out", out_dir, "directory for curves and per-seed artifacts");

  std::string variants_csv = "her,er-oracle";
  int seed_count = 0;
  auto* compare =
      app.add_subcommand("compare", "train several variants and rank their curves");
  compare->add_option("--config", config_path, "experiment config JSON")->required();
  compare->add_option("--variants", variants_csv,
                      "comma list of ddpg, her, er-oracle, er-cnn");
  compare->add_option("--seeds", seed_count, "use seeds 1..N instead of the config's");
  compare->add_option("--out", out_dir, "directory for the comparison report");

  std::string in_path, out_path;
  auto* plot = app.add_subcommand("plot", "render a raw curve CSV as an SVG");
  plot->add_option("--in", in_path, "curves.csv produced by run or compare")
      ->required();
  plot->add_option("--out", out_path, "output SVG path")->required();

  std::vector<std::string> log_files;
  std::string env_name = "door_push_1d";
  std::uint64_t datagen_seed = 0;
  std::size_t render = 32;
  auto* datagen =
      app.add_subcommand("datagen", "label terminal images from episode logs");
  datagen->add_option("--log", log_files, "episode log (repeatable)")->required();
  datagen->add_option("--env", env_name, "environment the episodes came from");
  datagen->add_option("--out", out_dir, "dataset directory")->required();
  datagen->add_option("--seed", datagen_seed, "split assignment seed");
  datagen->add_option("--render", render, "image edge length in pixels");

  std::string manifest_path, preset = "desk";
  RankerTrainConfig tc;
  auto* train_ranker =
      app.add_subcommand("train-ranker", "fit the episode-group classifier");
  train_ranker->add_option("--manifest", manifest_path, "dataset manifest JSON")
      ->required();
  train_ranker->add_option("--preset", preset, "architecture: desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  train_ranker->add_option("--epochs", tc.epochs, "training epochs");
  train_ranker->add_option("--lr", tc.lr, "learning rate");
  train_ranker->add_option("--batch", tc.batch_size, "minibatch size");
  train_ranker->add_option("--samples", tc.samples_per_epoch,
                           "training samples drawn per epoch");
  train_ranker->add_option("--seed", tc.seed, "initialization and batch seed");
  train_ranker->add_option("--report", tc.report_path,
                           "per-epoch CSV (epoch,train_loss,val_acc)");
  train_ranker->add_option("--checkpoint", tc.checkpoint_path,
                           "where to write the best network (default: next to "
                           "the manifest)");

  std::string ckpt_path;
  auto* describe = app.add_subcommand("describe", "print a checkpoint's layer table");
  describe->add_option("checkpoint", ckpt_path, "network checkpoint")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir);
    if (compare->parsed())
      return cmd_compare(config_path, variants_csv, seed_count, out_dir);
    if (plot->parsed()) return cmd_plot(in_path, out_path);
    if (datagen->parsed())
      return cmd_datagen(log_files, env_name, out_dir, datagen_seed, render);
    if (train_ranker->parsed()) return cmd_train_ranker(manifest_path, preset, tc);
    if (describe->parsed()) return cmd_describe(ckpt_path);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
