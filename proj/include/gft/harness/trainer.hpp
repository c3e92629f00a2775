#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "gft/harness/optim.hpp"
#include "gft/model/gft_model.hpp"
#include "gft/pointops/geometry.hpp"

namespace gft::harness {

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;    // mean training loss over the epoch
  double metric = 0.0;  // eval OA (classification) or instance mIoU (segmentation)
};

struct TrainOptions {
  std::optional<std::filesystem::path> checkpoint_path;  // best-by-eval weights
  std::optional<std::filesystem::path> log_path;         // CSV epoch,lr,loss,metric
  std::ostream* progress = nullptr;                      // one line per epoch
  std::size_t max_steps = 0;                             // 0 = no limit
  bool eval_each_epoch = true;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = -1;
  double best_metric = -1.0;
  std::size_t steps = 0;
};

struct EvalResult {
  double metric = 0.0;  // OA or instance mIoU
  double loss = 0.0;
  std::vector<int> predictions;  // classification only
};

// Classification: overall accuracy. Segmentation: instance mIoU over all
// part ids of the model, each cloud's object label (or 0) as category.
EvalResult evaluate(const model::GftModel& model, const std::vector<pointops::PointCloud>& clouds);

// Mini-batch AdamW on the cosine schedule. Each sample runs on its own tape
// with its loss scaled by 1/B, so the batch gradient is accumulated in a
// fixed order. Shuffling, augmentation and dropout masks derive from
// cfg.seed only. The learning rate is constant within an epoch.
TrainResult train(model::GftModel& model, const std::vector<pointops::PointCloud>& train_set,
                  const std::vector<pointops::PointCloud>& eval_set, const TrainConfig& cfg,
                  const TrainOptions& options = {});

void write_train_log(const std::vector<EpochLog>& log, const std::filesystem::path& path);

}  // namespace gft::harness
