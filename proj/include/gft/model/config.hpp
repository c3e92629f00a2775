#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

namespace gft::model {

enum class Task { classification, segmentation };

struct EdgeConvConfig {
  std::size_t k_graph = 20;
  std::vector<std::size_t> dims{64, 64, 64, 64};
  std::size_t ffn_dim = 256;
  std::size_t out_dim = 256;
  // true: KNN recomputed in every layer's input space; false: the graph of
  // the first layer's input is reused by all layers.
  bool dynamic_graph = true;
};

// Which token summaries feed the classifier. Disabled slots are zero-filled
// so the head width stays 3*D.
struct PoolingConfig {
  bool cls = true;
  bool patches = true;
  bool prompts = true;
};

struct SegHeadConfig {
  std::size_t num_parts = 50;
  std::size_t dec_dim = 384;
  std::size_t dec_blocks = 2;
  std::size_t dec_heads = 6;
  std::size_t dec_mlp_hidden = 512;
  std::size_t point_hidden = 256;
  std::vector<int> taps{3, 6, 9, 11};
  std::size_t interp_neighbors = 3;
};

struct GftModelConfig {
  Task task = Task::classification;

  // Backbone.
  std::size_t dim = 384;
  std::size_t depth = 12;
  std::size_t heads = 6;
  std::size_t mlp_hidden = 1536;
  double backbone_init_std = 0.02;

  // Tokenizer.
  std::size_t num_points = 2048;
  std::size_t num_groups = 128;
  std::size_t group_size = 32;
  std::size_t tokenizer_hidden = 128;
  bool unlock_tokenizer = true;
  bool train_cls = true;

  // GFT modules.
  std::size_t prompt_length = 50;
  bool use_edgeconv = true;
  EdgeConvConfig edgeconv;
  std::size_t xattn_dim = 32;
  std::size_t xattn_heads = 2;
  std::set<int> interaction_layers{1, 4, 7, 10};

  // Heads.
  std::size_t num_classes = 15;
  std::vector<std::size_t> head_hidden{256, 256};
  double head_dropout = 0.5;
  PoolingConfig pooling;
  SegHeadConfig seg;

  // Throws ArgumentError on an inconsistent configuration.
  void validate() const;

  // Same backbone and head; every GFT module disabled and the tokenizer and
  // CLS token frozen, so only the task head trains.
  GftModelConfig linear_probe() const;

  static GftModelConfig full_classification();
  static GftModelConfig full_segmentation();
  // Gradient-check size: D=16, L=8, s=4, k_graph=3, k_group=4.
  static GftModelConfig tiny();
  // Single-core training size used by the toy experiments.
  static GftModelConfig desk();
};

std::string to_string(Task task);

}  // namespace gft::model
