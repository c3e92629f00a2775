#include "gft/model/config.hpp"

#include "gft/errors.hpp"

namespace gft::model {

namespace {
void require(bool ok, const std::string& what) {
  if (!ok) throw ArgumentError("model config: " + what);
}
}  // namespace

void GftModelConfig::validate() const {
  require(dim > 0 && depth > 0 && mlp_hidden > 0, "D, F and MLP width must be positive");
  require(heads > 0 && dim % heads == 0, "attention heads must divide D");
  require(num_groups > 0 && group_size > 0 && tokenizer_hidden > 0, "tokenizer sizes must be positive");
  require(num_points >= num_groups && num_points >= group_size, "num_points must cover the groups");
  for (int i : interaction_layers) {
    require(i >= 1 && i <= static_cast<int>(depth), "interaction layer " + std::to_string(i) + " outside [1, F]");
  }
  if (!interaction_layers.empty()) {
    require(use_edgeconv, "interactions need the EdgeConv pyramid");
    require(xattn_dim > 0 && xattn_heads > 0 && xattn_dim % xattn_heads == 0,
            "cross-attention heads must divide the cross-attention width");
  }
  if (use_edgeconv) {
    require(!edgeconv.dims.empty(), "EdgeConv needs at least one layer");
    for (auto d : edgeconv.dims) require(d > 0, "EdgeConv widths must be positive");
    require(edgeconv.ffn_dim > 0 && edgeconv.out_dim > 0, "EdgeConv FFN widths must be positive");
    require(edgeconv.k_graph >= 1 && edgeconv.k_graph + 1 <= prompt_length + num_groups,
            "EdgeConv k must be at most s+L-1");
  }
  if (task == Task::classification) {
    require(num_classes >= 1, "need at least one class");
    for (auto h : head_hidden) require(h > 0, "head widths must be positive");
    require(head_dropout >= 0.0 && head_dropout < 1.0, "dropout must be in [0, 1)");
  } else {
    require(seg.num_parts >= 1, "need at least one part class");
    require(!seg.taps.empty(), "segmentation needs encoder taps");
    for (int t : seg.taps) require(t >= 1 && t <= static_cast<int>(depth), "segmentation tap outside [1, F]");
    require(seg.dec_heads > 0 && seg.dec_dim % seg.dec_heads == 0, "decoder heads must divide decoder width");
    require(seg.interp_neighbors >= 1, "interpolation needs at least one neighbour");
  }
}

GftModelConfig GftModelConfig::linear_probe() const {
  GftModelConfig c = *this;
  c.prompt_length = 0;
  c.use_edgeconv = false;
  c.interaction_layers.clear();
  c.unlock_tokenizer = false;
  c.train_cls = false;
  return c;
}

GftModelConfig GftModelConfig::full_classification() { return GftModelConfig{}; }

GftModelConfig GftModelConfig::full_segmentation() {
  GftModelConfig c;
  c.task = Task::segmentation;
  c.num_classes = 16;
  c.seg.num_parts = 50;
  return c;
}

GftModelConfig GftModelConfig::tiny() {
  GftModelConfig c;
  c.dim = 16;
  c.depth = 3;
  c.heads = 2;
  c.mlp_hidden = 32;
  c.num_points = 48;
  c.num_groups = 8;
  c.group_size = 4;
  c.tokenizer_hidden = 8;
  c.prompt_length = 4;
  c.edgeconv.k_graph = 3;
  c.edgeconv.dims = {6, 5};
  c.edgeconv.ffn_dim = 8;
  c.edgeconv.out_dim = 8;
  c.xattn_dim = 4;
  c.xattn_heads = 2;
  c.interaction_layers = {1, 3};
  c.num_classes = 3;
  c.head_hidden = {8, 8};
  c.seg.num_parts = 3;
  c.seg.dec_dim = 8;
  c.seg.dec_blocks = 1;
  c.seg.dec_heads = 2;
  c.seg.dec_mlp_hidden = 16;
  c.seg.point_hidden = 8;
  c.seg.taps = {1, 2, 3};
  return c;
}

GftModelConfig GftModelConfig::desk() {
  GftModelConfig c;
  c.dim = 64;
  c.depth = 4;
  c.heads = 4;
  c.mlp_hidden = 128;
  c.num_points = 256;
  c.num_groups = 32;
  c.group_size = 16;
  c.tokenizer_hidden = 32;
  c.prompt_length = 8;
  c.edgeconv.k_graph = 8;
  c.edgeconv.dims = {32, 32};
  c.edgeconv.ffn_dim = 64;
  c.edgeconv.out_dim = 64;
  c.xattn_dim = 32;
  c.xattn_heads = 2;
  c.interaction_layers = {1, 3};
  c.num_classes = 4;
  c.head_hidden = {64, 64};
  c.seg.num_parts = 3;
  c.seg.dec_dim = 64;
  c.seg.dec_blocks = 1;
  c.seg.dec_heads = 4;
  c.seg.dec_mlp_hidden = 128;
  c.seg.point_hidden = 64;
  c.seg.taps = {1, 2, 3, 4};
  return c;
}

std::string to_string(Task task) { return task == Task::classification ? "classification" : "segmentation"; }

}  // namespace gft::model
