#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "gft/backbone/checkpoint.hpp"
#include "gft/errors.hpp"
#include "gft/harness/attention_export.hpp"
#include "gft/harness/cloud_io.hpp"
#include "gft/harness/config_file.hpp"
#include "gft/harness/few_shot.hpp"
#include "gft/harness/synth.hpp"
#include "gft/harness/trainer.hpp"
#include "gft/model/accounting.hpp"
#include "gft/model/gft_model.hpp"

namespace fs = std::filesystem;
using namespace gft;

namespace {

struct Common {
  std::string config;
  std::string preset;
  std::string task;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* app, Common& c, const std::string& default_preset) {
  c.preset = default_preset;
  app->add_option("--config", c.config, "key=value run configuration")->check(CLI::ExistingFile);
  app->add_option("--preset", c.preset, "desk, tiny, classification or segmentation (overridden by the config)");
  app->add_option("--task", c.task, "classification or segmentation");
  app->add_option("--seed", c.seed, "seed for weights, data order and sampling");
}

harness::RunConfig resolve(const Common& c) {
  std::vector<harness::ConfigEntry> entries;
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    std::stringstream ss;
    ss << in.rdbuf();
    entries = harness::parse_config_text(ss.str());
  }
  bool has_preset = false, has_task = false;
  for (const auto& e : entries) {
    has_preset |= e.key == "preset";
    has_task |= e.key == "task";
  }
  if (!has_preset) entries.insert(entries.begin(), {"preset", c.preset, 0});
  if (!has_task && !c.task.empty()) entries.insert(entries.begin(), {"task", c.task, 0});
  auto cfg = harness::apply_config(entries);
  cfg.train.seed = c.seed;
  return cfg;
}

// Class count follows the data for classification manifests.
void fit_to_manifest(harness::RunConfig& cfg, const harness::DatasetManifest& m) {
  if (cfg.model.task == model::Task::classification) {
    if (!m.has_labels()) throw ArgumentError("classification needs a labelled manifest");
    cfg.model.num_classes = static_cast<std::size_t>(m.num_classes());
  }
}

void print_eval(const model::GftModel& model, double metric) {
  const char* name = model.config().task == model::Task::classification ? "OA" : "instance mIoU";
  std::printf("%s: %.4f\n", name, metric);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph feature tuning for point-cloud transformers"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset and manifest");
  harness::SynthOptions so;
  std::string synth_kind = "classification4";
  std::string synth_out;
  synth->add_option("--kind", synth_kind, "classification4 or parts3");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--n-instances", so.n_instances);
  synth->add_option("--n-points", so.n_points);
  synth->add_option("--noise", so.noise_sigma, "noise std relative to scale");
  synth->add_option("--test-fraction", so.test_fraction);
  synth->add_option("--seed", so.seed);
  bool synth_upright = false;
  synth->add_flag("--upright", synth_upright, "classification4: rotate about y only");
  std::string synth_config;
  synth->add_option("--config", synth_config, "accepted for uniformity; unused")->check(CLI::ExistingFile);

  // train
  auto* train = app.add_subcommand("train", "fine-tune on a manifest's train split");
  Common tc;
  add_common(train, tc, "desk");
  std::string train_manifest, train_ckpt, train_log;
  std::optional<int> train_epochs;
  train->add_option("--manifest", train_manifest)->required()->check(CLI::ExistingFile);
  train->add_option("--checkpoint", train_ckpt, "where to save the best checkpoint");
  train->add_option("--log", train_log, "CSV epoch log");
  train->add_option("--epochs", train_epochs, "overrides the config");
  bool train_probe = false;
  train->add_flag("--linear-probe", train_probe, "disable every GFT module and train only the head");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  Common ec;
  add_common(eval, ec, "desk");
  std::string eval_manifest, eval_ckpt, eval_split = "test";
  bool eval_probe = false;
  eval->add_option("--manifest", eval_manifest)->required()->check(CLI::ExistingFile);
  eval->add_option("--checkpoint", eval_ckpt)->required()->check(CLI::ExistingFile);
  eval->add_option("--split", eval_split);
  eval->add_flag("--linear-probe", eval_probe);

  // few-shot
  auto* few = app.add_subcommand("few-shot", "N-way K-shot episode: train and report query accuracy");
  Common fc;
  add_common(few, fc, "desk");
  std::string few_manifest;
  std::size_t n_way = 5, k_shot = 10, queries = 20;
  few->add_option("--manifest", few_manifest)->required()->check(CLI::ExistingFile);
  few->add_option("--n-way", n_way);
  few->add_option("--k-shot", k_shot);
  few->add_option("--queries", queries, "test instances per class");

  // count-params
  auto* count = app.add_subcommand("count-params", "print the parameter ledger");
  Common cc;
  add_common(count, cc, "classification");
  bool count_summary = false;
  count->add_flag("--summary", count_summary, "only the summary lines");

  // estimate-flops
  auto* flops = app.add_subcommand("estimate-flops", "inference FLOPs per cloud");
  Common xc;
  add_common(flops, xc, "classification");
  std::optional<std::size_t> flop_points;
  flops->add_option("--points", flop_points, "points per cloud (default: num_points)");

  // export-attention
  auto* att = app.add_subcommand("export-attention", "write CLS/patch attention of one layer as CSV");
  Common ac;
  add_common(att, ac, "desk");
  std::string att_cloud, att_ckpt, att_out, att_dir = "cls-query";
  std::optional<int> att_layer;
  att->add_option("--cloud", att_cloud)->required()->check(CLI::ExistingFile);
  att->add_option("--checkpoint", att_ckpt)->check(CLI::ExistingFile);
  att->add_option("--layer", att_layer, "1..F (default: last)");
  att->add_option("--out", att_out)->required();
  att->add_option("--direction", att_dir, "cls-query or patch-query");
  std::size_t att_classes = 0;
  att->add_option("--num-classes", att_classes, "head size of the checkpoint");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      so.kind = harness::parse_synth_kind(synth_kind);
      so.full_rotation = !synth_upright;
      const auto m = harness::synth_dataset(so, synth_out);
      std::printf("wrote %zu clouds to %s\n", m.entries.size(), synth_out.c_str());
    } else if (*train) {
      auto cfg = resolve(tc);
      if (train_epochs) cfg.train.epochs = *train_epochs;
      if (cfg.train.warmup_epochs >= cfg.train.epochs) cfg.train.warmup_epochs = cfg.train.epochs - 1;
      const auto m = harness::load_manifest(train_manifest);
      fit_to_manifest(cfg, m);
      if (train_probe) cfg.model = cfg.model.linear_probe();
      model::GftModel model(cfg.model, tc.seed);
      const auto train_set = harness::load_clouds(m, m.split(harness::Split::train));
      const auto test_set = harness::load_clouds(m, m.split(harness::Split::test));
      harness::TrainOptions opts;
      if (!train_ckpt.empty()) opts.checkpoint_path = train_ckpt;
      if (!train_log.empty()) opts.log_path = train_log;
      opts.progress = &std::cout;
      const auto r = harness::train(model, train_set, test_set, cfg.train, opts);
      std::printf("best epoch %d: %.4f\n", r.best_epoch, r.best_metric);
    } else if (*eval) {
      auto cfg = resolve(ec);
      const auto m = harness::load_manifest(eval_manifest);
      fit_to_manifest(cfg, m);
      if (eval_probe) cfg.model = cfg.model.linear_probe();
      model::GftModel model(cfg.model, ec.seed);
      backbone::load_checkpoint(model.params(), eval_ckpt);
      const auto clouds = harness::load_clouds(m, m.split(harness::parse_split(eval_split)));
      print_eval(model, harness::evaluate(model, clouds).metric);
    } else if (*few) {
      auto cfg = resolve(fc);
      const auto m = harness::load_manifest(few_manifest);
      const auto task = harness::sample_few_shot(m, n_way, k_shot, fc.seed, queries);
      cfg.model.num_classes = n_way;
      model::GftModel model(cfg.model, fc.seed);
      const auto train_set = harness::load_clouds(m, task.train);
      const auto test_set = harness::load_clouds(m, task.test);
      harness::TrainOptions opts;
      opts.progress = &std::cout;
      const auto r = harness::train(model, train_set, test_set, cfg.train, opts);
      std::printf("%zu-way %zu-shot, classes", n_way, k_shot);
      for (int c : task.class_ids) std::printf(" %d", c);
      std::printf("\nfinal OA: %.4f  best OA: %.4f (epoch %d)\n", r.log.back().metric, r.best_metric, r.best_epoch);
    } else if (*count) {
      const auto cfg = resolve(cc);
      model::GftModel model(cfg.model, cc.seed);
      std::cout << model::format_ledger(model::count_trainable_params(model.params()), !count_summary);
    } else if (*flops) {
      const auto cfg = resolve(xc);
      cfg.model.validate();
      std::cout << model::format_flops(model::estimate_flops(cfg.model, flop_points.value_or(cfg.model.num_points)));
    } else if (*att) {
      auto cfg = resolve(ac);
      if (att_classes != 0) cfg.model.num_classes = att_classes;
      model::GftModel model(cfg.model, ac.seed);
      if (!att_ckpt.empty()) backbone::load_checkpoint(model.params(), att_ckpt);
      const auto cloud = harness::load_cloud(att_cloud);
      harness::AttentionDirection dir;
      if (att_dir == "cls-query") {
        dir = harness::AttentionDirection::cls_query;
      } else if (att_dir == "patch-query") {
        dir = harness::AttentionDirection::patch_query;
      } else {
        throw ArgumentError("unknown direction '" + att_dir + "'");
      }
      const int layer = att_layer.value_or(static_cast<int>(cfg.model.depth));
      harness::write_attention_csv(harness::extract_attention(model, cloud, layer, dir), att_out);
      std::printf("wrote %s\n", att_out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
