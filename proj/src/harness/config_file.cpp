#include "gft/harness/config_file.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "gft/errors.hpp"

namespace gft::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const ConfigEntry& e) {
  throw ParseError("config: bad value '" + e.value + "' for key '" + e.key + "'", e.line);
}

double as_double(const ConfigEntry& e) {
  double v = 0;
  const char* end = e.value.data() + e.value.size();
  auto [p, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || p != end) bad_value(e);
  return v;
}

long long as_int(const ConfigEntry& e) {
  long long v = 0;
  const char* end = e.value.data() + e.value.size();
  auto [p, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || p != end) bad_value(e);
  return v;
}

std::size_t as_size(const ConfigEntry& e) {
  const long long v = as_int(e);
  if (v < 0) bad_value(e);
  return static_cast<std::size_t>(v);
}

bool as_bool(const ConfigEntry& e) {
  if (e.value == "1" || e.value == "true" || e.value == "yes") return true;
  if (e.value == "0" || e.value == "false" || e.value == "no") return false;
  bad_value(e);
}

// Comma or space separated integers; may be bracketed.
std::vector<long long> as_list(const ConfigEntry& e) {
  std::string s = e.value;
  for (char& c : s) {
    if (c == ',' || c == '[' || c == ']') c = ' ';
  }
  std::istringstream in(s);
  std::vector<long long> out;
  std::string tok;
  while (in >> tok) {
    ConfigEntry item{e.key, tok, e.line};
    out.push_back(as_int(item));
  }
  return out;
}

std::vector<std::size_t> as_size_list(const ConfigEntry& e) {
  std::vector<std::size_t> out;
  for (long long v : as_list(e)) {
    if (v < 0) bad_value(e);
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const ConfigEntry&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"learning_rate", [](RunConfig& c, const ConfigEntry& e) { c.train.learning_rate = as_double(e); }},
      {"warmup_lr", [](RunConfig& c, const ConfigEntry& e) { c.train.warmup_lr = as_double(e); }},
      {"min_lr", [](RunConfig& c, const ConfigEntry& e) { c.train.min_lr = as_double(e); }},
      {"warmup_epochs", [](RunConfig& c, const ConfigEntry& e) { c.train.warmup_epochs = static_cast<int>(as_size(e)); }},
      {"epochs", [](RunConfig& c, const ConfigEntry& e) { c.train.epochs = static_cast<int>(as_size(e)); }},
      {"weight_decay", [](RunConfig& c, const ConfigEntry& e) { c.train.weight_decay = as_double(e); }},
      {"batch_size", [](RunConfig& c, const ConfigEntry& e) { c.train.batch_size = as_size(e); }},
      {"augment_rotate", [](RunConfig& c, const ConfigEntry& e) { c.train.augment.rotate = as_bool(e); }},
      {"augment_scale", [](RunConfig& c, const ConfigEntry& e) { c.train.augment.scale = as_bool(e); }},
      {"augment_translate", [](RunConfig& c, const ConfigEntry& e) { c.train.augment.translate = as_bool(e); }},
      {"prompt_length", [](RunConfig& c, const ConfigEntry& e) { c.model.prompt_length = as_size(e); }},
      {"edgeconv_knn", [](RunConfig& c, const ConfigEntry& e) { c.model.edgeconv.k_graph = as_size(e); }},
      {"edgeconv_dims", [](RunConfig& c, const ConfigEntry& e) { c.model.edgeconv.dims = as_size_list(e); }},
      {"ffn_dim", [](RunConfig& c, const ConfigEntry& e) { c.model.edgeconv.ffn_dim = as_size(e); }},
      {"edgeconv_out_dim", [](RunConfig& c, const ConfigEntry& e) { c.model.edgeconv.out_dim = as_size(e); }},
      {"dynamic_graph", [](RunConfig& c, const ConfigEntry& e) { c.model.edgeconv.dynamic_graph = as_bool(e); }},
      {"use_edgeconv", [](RunConfig& c, const ConfigEntry& e) { c.model.use_edgeconv = as_bool(e); }},
      {"xattn_dim", [](RunConfig& c, const ConfigEntry& e) { c.model.xattn_dim = as_size(e); }},
      {"xattn_heads", [](RunConfig& c, const ConfigEntry& e) { c.model.xattn_heads = as_size(e); }},
      {"interaction_layers",
       [](RunConfig& c, const ConfigEntry& e) {
         c.model.interaction_layers.clear();
         for (long long v : as_list(e)) c.model.interaction_layers.insert(static_cast<int>(v));
       }},
      {"num_patches", [](RunConfig& c, const ConfigEntry& e) { c.model.num_groups = as_size(e); }},
      {"patch_size", [](RunConfig& c, const ConfigEntry& e) { c.model.group_size = as_size(e); }},
      {"num_points", [](RunConfig& c, const ConfigEntry& e) { c.model.num_points = as_size(e); }},
      {"embed_dim", [](RunConfig& c, const ConfigEntry& e) { c.model.dim = as_size(e); }},
      {"depth", [](RunConfig& c, const ConfigEntry& e) { c.model.depth = as_size(e); }},
      {"heads", [](RunConfig& c, const ConfigEntry& e) { c.model.heads = as_size(e); }},
      {"mlp_hidden", [](RunConfig& c, const ConfigEntry& e) { c.model.mlp_hidden = as_size(e); }},
      {"tokenizer_hidden", [](RunConfig& c, const ConfigEntry& e) { c.model.tokenizer_hidden = as_size(e); }},
      {"unlock_tokenizer", [](RunConfig& c, const ConfigEntry& e) { c.model.unlock_tokenizer = as_bool(e); }},
      {"num_classes", [](RunConfig& c, const ConfigEntry& e) { c.model.num_classes = as_size(e); }},
      {"num_parts", [](RunConfig& c, const ConfigEntry& e) { c.model.seg.num_parts = as_size(e); }},
      {"head_hidden", [](RunConfig& c, const ConfigEntry& e) { c.model.head_hidden = as_size_list(e); }},
      {"dropout", [](RunConfig& c, const ConfigEntry& e) { c.model.head_dropout = as_double(e); }},
      {"pool_cls", [](RunConfig& c, const ConfigEntry& e) { c.model.pooling.cls = as_bool(e); }},
      {"pool_patches", [](RunConfig& c, const ConfigEntry& e) { c.model.pooling.patches = as_bool(e); }},
      {"pool_prompts", [](RunConfig& c, const ConfigEntry& e) { c.model.pooling.prompts = as_bool(e); }},
  };
  return table;
}

}  // namespace

model::GftModelConfig preset_config(const std::string& name) {
  if (name == "desk") return model::GftModelConfig::desk();
  if (name == "tiny") return model::GftModelConfig::tiny();
  if (name == "classification") return model::GftModelConfig::full_classification();
  if (name == "segmentation") return model::GftModelConfig::full_segmentation();
  throw ArgumentError("unknown preset '" + name + "' (expected desk, tiny, classification, segmentation)");
}

std::vector<ConfigEntry> parse_config_text(const std::string& text) {
  std::vector<ConfigEntry> out;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("config: expected key=value", line);
    ConfigEntry e{trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line};
    if (e.key.empty()) throw ParseError("config: empty key", line);
    out.push_back(std::move(e));
  }
  return out;
}

RunConfig apply_config(const std::vector<ConfigEntry>& entries) {
  RunConfig cfg;
  for (const auto& e : entries) {
    if (e.key != "preset") continue;
    try {
      cfg.model = preset_config(e.value);
    } catch (const ArgumentError& err) {
      throw ParseError(err.what(), e.line);
    }
  }
  for (const auto& e : entries) {
    if (e.key != "task") continue;
    if (e.value == "classification") {
      cfg.model.task = model::Task::classification;
    } else if (e.value == "segmentation") {
      cfg.model.task = model::Task::segmentation;
    } else {
      bad_value(e);
    }
  }
  const auto& table = setters();
  for (const auto& e : entries) {
    if (e.key == "preset" || e.key == "task") continue;
    const auto it = table.find(e.key);
    if (it == table.end()) throw ParseError("config: unknown key '" + e.key + "'", e.line);
    it->second(cfg, e);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return apply_config(parse_config_text(ss.str()));
}

}  // namespace gft::harness
