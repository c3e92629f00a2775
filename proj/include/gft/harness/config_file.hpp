#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gft/harness/optim.hpp"
#include "gft/model/config.hpp"

namespace gft::harness {

struct RunConfig {
  model::GftModelConfig model = model::GftModelConfig::desk();
  TrainConfig train;
};

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

// key=value lines; '#' starts a comment, blank lines are skipped.
// Throws ParseError (with line number) on a line without '='.
std::vector<ConfigEntry> parse_config_text(const std::string& text);

// Applies entries on top of the preset named by `preset` (desk, tiny,
// classification, segmentation; default desk) and `task`, which are
// applied first wherever they appear. Unknown keys and bad values throw
// ParseError with the offending line.
//
// Keys: learning_rate warmup_lr min_lr warmup_epochs epochs weight_decay
//   batch_size prompt_length edgeconv_knn edgeconv_dims ffn_dim
//   edgeconv_out_dim dynamic_graph xattn_dim xattn_heads interaction_layers
//   num_patches patch_size num_points embed_dim depth heads mlp_hidden
//   tokenizer_hidden num_classes num_parts head_hidden dropout
//   unlock_tokenizer pool_cls pool_patches pool_prompts use_edgeconv
//   augment_rotate augment_scale augment_translate preset task
RunConfig apply_config(const std::vector<ConfigEntry>& entries);

RunConfig load_config(const std::filesystem::path& path);

model::GftModelConfig preset_config(const std::string& name);

}  // namespace gft::harness
