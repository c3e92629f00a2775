#pragma once

#include <map>
#include <span>
#include <vector>

#include "gft/numcore/ops.hpp"

namespace gft::heads {

using numcore::cross_entropy;
using numcore::nll_loss;

// correct / total. Throws ArgumentError on empty or misaligned input.
double overall_accuracy(std::span<const int> predicted, std::span<const int> labels);

struct ShapePrediction {
  int category = 0;
  std::vector<int> predicted;  // per point part id
  std::vector<int> labels;
};

// Mean IoU over the category's parts. A part absent from both prediction and
// ground truth scores 1.
double shape_miou(std::span<const int> predicted, std::span<const int> labels, std::span<const int> parts);

struct SegmentationScores {
  double instance_miou = 0.0;  // mean over shapes
  double class_miou = 0.0;     // mean over categories of per-category instance means
  double point_accuracy = 0.0;
  std::map<int, double> per_category;
};

SegmentationScores segmentation_scores(const std::vector<ShapePrediction>& shapes,
                                       const std::map<int, std::vector<int>>& category_parts);

}  // namespace gft::heads
