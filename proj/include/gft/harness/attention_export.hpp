#pragma once

#include <filesystem>
#include <vector>

#include "gft/backbone/embedding.hpp"
#include "gft/model/gft_model.hpp"
#include "gft/numcore/tensor.hpp"

namespace gft::harness {

enum class AttentionDirection {
  cls_query,    // row of the CLS query, columns of the patch keys
  patch_query,  // column of the CLS key, rows of the patch queries
};

struct PatchAttention {
  std::vector<double> centers;  // L x 3
  std::vector<double> weights;  // L, head-averaged
  // cls_query: probability mass on the CLS and prompt keys (1 - sum(weights)).
  // patch_query: 0.
  double excluded_mass = 0.0;
  AttentionDirection direction = AttentionDirection::cls_query;
};

// Head-averaged CLS/patch attention from raw per-head R x R maps.
PatchAttention patch_attention(const std::vector<numcore::Tensor>& head_maps, const backbone::TokenLayout& layout,
                               const std::vector<double>& centers, AttentionDirection direction);

// Runs the model on `cloud` and extracts layer `layer` (1..F). Throws
// ArgumentError for a layer outside that range.
PatchAttention extract_attention(const model::GftModel& model, const pointops::PointCloud& cloud, int layer,
                                 AttentionDirection direction = AttentionDirection::cls_query);

// CSV: header center_x,center_y,center_z,weight; L rows; then a footer
// "# excluded_mass=<v>" (cls_query) or "# direction=patch_query".
void write_attention_csv(const PatchAttention& attention, const std::filesystem::path& path);

}  // namespace gft::harness
