#include "gft/heads/metrics.hpp"

#include <string>

#include "gft/errors.hpp"

namespace gft::heads {

double overall_accuracy(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.empty()) throw ArgumentError("accuracy of an empty prediction set");
  if (predicted.size() != labels.size()) throw ArgumentError("prediction and label counts differ");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

double shape_miou(std::span<const int> predicted, std::span<const int> labels, std::span<const int> parts) {
  if (predicted.size() != labels.size()) throw ArgumentError("prediction and label counts differ");
  if (parts.empty()) throw ArgumentError("category has no parts");
  double total = 0.0;
  for (int part : parts) {
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const bool p = predicted[i] == part;
      const bool g = labels[i] == part;
      inter += p && g;
      uni += p || g;
    }
    total += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  }
  return total / static_cast<double>(parts.size());
}

SegmentationScores segmentation_scores(const std::vector<ShapePrediction>& shapes,
                                       const std::map<int, std::vector<int>>& category_parts) {
  if (shapes.empty()) throw ArgumentError("segmentation metrics of an empty shape set");
  SegmentationScores s;
  std::map<int, std::pair<double, std::size_t>> per_cat;
  std::size_t correct = 0;
  std::size_t points = 0;
  for (const auto& shape : shapes) {
    auto it = category_parts.find(shape.category);
    if (it == category_parts.end()) {
      throw ArgumentError("no part list for category " + std::to_string(shape.category));
    }
    const double iou = shape_miou(shape.predicted, shape.labels, it->second);
    s.instance_miou += iou;
    auto& acc = per_cat[shape.category];
    acc.first += iou;
    acc.second += 1;
    for (std::size_t i = 0; i < shape.labels.size(); ++i) correct += shape.predicted[i] == shape.labels[i];
    points += shape.labels.size();
  }
  s.instance_miou /= static_cast<double>(shapes.size());
  for (const auto& [cat, acc] : per_cat) {
    s.per_category[cat] = acc.first / static_cast<double>(acc.second);
    s.class_miou += s.per_category[cat];
  }
  s.class_miou /= static_cast<double>(per_cat.size());
  s.point_accuracy = points ? static_cast<double>(correct) / static_cast<double>(points) : 0.0;
  return s;
}

}  // namespace gft::heads
