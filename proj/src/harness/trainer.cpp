#include "gft/harness/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "gft/backbone/checkpoint.hpp"
#include "gft/errors.hpp"
#include "gft/heads/metrics.hpp"
#include "gft/numcore/ops.hpp"

namespace gft::harness {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

EvalResult evaluate(const model::GftModel& model, const std::vector<pointops::PointCloud>& clouds) {
  if (clouds.empty()) throw ArgumentError("evaluate: empty dataset");
  const auto& cfg = model.config();
  EvalResult out;
  if (cfg.task == model::Task::classification) {
    std::vector<int> labels;
    for (const auto& c : clouds) {
      if (!c.object_label) throw ArgumentError("evaluate: classification cloud without a label");
      const auto r = model.forward(c);
      out.loss += model.loss(r, c).item();
      out.predictions.push_back(model.predict(r).front());
      labels.push_back(*c.object_label);
    }
    out.metric = heads::overall_accuracy(out.predictions, labels);
  } else {
    std::vector<heads::ShapePrediction> shapes;
    std::map<int, std::vector<int>> parts;
    std::vector<int> all(cfg.seg.num_parts);
    std::iota(all.begin(), all.end(), 0);
    for (const auto& c : clouds) {
      const auto r = model.forward(c);
      out.loss += model.loss(r, c).item();
      const int category = c.object_label.value_or(0);
      parts[category] = all;
      shapes.push_back({category, model.predict(r), c.point_labels});
    }
    out.metric = heads::segmentation_scores(shapes, parts).instance_miou;
  }
  out.loss /= static_cast<double>(clouds.size());
  return out;
}

TrainResult train(model::GftModel& model, const std::vector<pointops::PointCloud>& train_set,
                  const std::vector<pointops::PointCloud>& eval_set, const TrainConfig& cfg,
                  const TrainOptions& options) {
  cfg.validate();
  if (train_set.empty()) throw ArgumentError("train: empty training set");
  auto& store = model.params();
  AdamW opt(cfg.beta1, cfg.beta2, cfg.adam_eps, cfg.weight_decay);
  std::mt19937_64 order_rng(mix(cfg.seed, 1));
  std::mt19937_64 aug_rng(mix(cfg.seed, 2));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  std::optional<std::ofstream> log_file;
  if (options.log_path) {
    log_file.emplace(*options.log_path);
    if (!*log_file) throw FormatError("cannot write " + options.log_path->string());
    *log_file << "epoch,lr,loss,metric\n";
  }

  bool done = false;
  for (int epoch = 0; epoch < cfg.epochs && !done; ++epoch) {
    const double lr = cosine_schedule(epoch, cfg);
    std::shuffle(order.begin(), order.end(), order_rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const double inv_b = 1.0 / static_cast<double>(end - begin);
      store.zero_grad();
      for (std::size_t j = begin; j < end; ++j) {
        pointops::PointCloud sample = train_set[order[j]];
        augment(sample, cfg.augment, aug_rng);
        model::ForwardOptions fo;
        fo.training = true;
        fo.dropout_seed = mix(cfg.seed, 1000003ULL * result.steps + j);
        numcore::Tape tape;
        numcore::TapeScope scope(tape);
        const auto r = model.forward(sample, fo);
        const auto loss = model.loss(r, sample);
        loss_sum += loss.item();
        ++seen;
        tape.backward(numcore::scale(loss, inv_b));
      }
      opt.step(store, lr);
      ++result.steps;
      if (options.max_steps != 0 && result.steps >= options.max_steps) {
        done = true;
        break;
      }
    }

    EpochLog row{epoch, lr, loss_sum / static_cast<double>(seen), 0.0};
    if (options.eval_each_epoch && !eval_set.empty()) row.metric = evaluate(model, eval_set).metric;
    if (row.metric > result.best_metric) {
      result.best_metric = row.metric;
      result.best_epoch = epoch;
      if (options.checkpoint_path) backbone::save_checkpoint(store, *options.checkpoint_path);
    }
    result.log.push_back(row);
    if (log_file) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.6f\n", row.epoch, row.lr, row.loss, row.metric);
      *log_file << buf << std::flush;
    }
    if (options.progress) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "epoch %3d  lr %.3e  loss %.4f  metric %.4f\n", row.epoch, row.lr, row.loss,
                    row.metric);
      *options.progress << buf << std::flush;
    }
  }
  return result;
}

void write_train_log(const std::vector<EpochLog>& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "epoch,lr,loss,metric\n";
  for (const auto& row : log) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.6f\n", row.epoch, row.lr, row.loss, row.metric);
    out << buf;
  }
}

}  // namespace gft::harness
