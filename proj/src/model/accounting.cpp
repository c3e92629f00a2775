#include "gft/model/accounting.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

namespace gft::model {

double ParamLedger::trainable_percent() const {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(trainable) / static_cast<double>(total);
}

ParamLedger count_trainable_params(const numcore::ParamStore& store) {
  ParamLedger ledger;
  for (const auto& p : store.params()) {
    ledger.entries.push_back({p.name, p.tensor.size(), p.frozen});
    ledger.total += p.tensor.size();
    if (!p.frozen) ledger.trainable += p.tensor.size();
  }
  return ledger;
}

std::string format_ledger(const ParamLedger& ledger, bool with_entries) {
  std::ostringstream os;
  char buf[256];
  if (with_entries) {
    for (const auto& e : ledger.entries) {
      std::snprintf(buf, sizeof buf, "%-48s %10zu  %s\n", e.name.c_str(), e.count, e.frozen ? "frozen" : "trainable");
      os << buf;
    }
  }
  std::snprintf(buf, sizeof buf, "trainable/total: %zu / %zu (%.2f%%)\n", ledger.trainable, ledger.total,
                ledger.trainable_percent());
  os << buf;
  std::snprintf(buf, sizeof buf, "#TP (M): %.2f (%.2f%%)\n", static_cast<double>(ledger.trainable) / 1e6,
                ledger.trainable_percent());
  os << buf;
  return os.str();
}

std::uint64_t FlopBreakdown::total() const {
  return sampling + tokenizer + encoder + attention + edgeconv + interactions + head;
}

namespace {
std::uint64_t linear_flops(std::uint64_t rows, std::uint64_t in, std::uint64_t out) { return 2 * rows * in * out; }
}  // namespace

FlopBreakdown estimate_flops(const GftModelConfig& cfg, std::size_t num_points) {
  FlopBreakdown f;
  const std::uint64_t n = num_points;
  const std::uint64_t l = cfg.num_groups;
  const std::uint64_t k = cfg.group_size;
  const std::uint64_t d = cfg.dim;
  const std::uint64_t s = cfg.prompt_length;
  const std::uint64_t rows = 1 + s + l;
  const std::uint64_t tokens = s + l;

  f.sampling = 2 * (l * n * 3) + 2 * (l * n * 3);

  const std::uint64_t h = cfg.tokenizer_hidden;
  f.tokenizer = linear_flops(l * k, 3, h) + linear_flops(l * k, 2 * h, d);

  const std::uint64_t per_layer = linear_flops(rows, d, 3 * d) + linear_flops(rows, d, d) +
                                  linear_flops(rows, d, cfg.mlp_hidden) + linear_flops(rows, cfg.mlp_hidden, d);
  f.encoder = cfg.depth * per_layer;
  f.attention = cfg.depth * (2 * rows * rows * d * 2);

  if (cfg.use_edgeconv) {
    std::uint64_t d_in = d;
    std::uint64_t total = 0;
    for (auto dj : cfg.edgeconv.dims) {
      f.edgeconv += 2 * tokens * tokens * d_in;  // feature-space KNN
      f.edgeconv += linear_flops(tokens * cfg.edgeconv.k_graph, 2 * d_in, dj);
      d_in = dj;
      total += dj;
    }
    f.edgeconv += linear_flops(tokens, total, cfg.edgeconv.ffn_dim) +
                  linear_flops(tokens, cfg.edgeconv.ffn_dim, cfg.edgeconv.out_dim);
    const std::uint64_t m = cfg.edgeconv.out_dim;
    const std::uint64_t x = cfg.xattn_dim;
    const std::uint64_t per_block = linear_flops(rows, d, x) + 2 * linear_flops(tokens, m, x) +
                                    2 * rows * tokens * x * 2 + linear_flops(rows, x, d);
    f.interactions = cfg.interaction_layers.size() * per_block;
  }

  if (cfg.task == Task::classification) {
    std::uint64_t in = 3 * d;
    for (auto w : cfg.head_hidden) {
      f.head += linear_flops(1, in, w);
      in = w;
    }
    f.head += linear_flops(1, in, cfg.num_classes);
  } else {
    const auto& sc = cfg.seg;
    const std::uint64_t dd = sc.dec_dim;
    f.head = sc.taps.size() * linear_flops(rows, d, dd) + linear_flops(rows, sc.taps.size() * dd, dd);
    f.head += sc.dec_blocks * (linear_flops(rows, dd, 3 * dd) + linear_flops(rows, dd, dd) +
                               linear_flops(rows, dd, sc.dec_mlp_hidden) + linear_flops(rows, sc.dec_mlp_hidden, dd) +
                               2 * rows * rows * dd * 2);
    f.head += 2 * n * l * 3 + linear_flops(n, l, dd);
    f.head += linear_flops(n, 2 * dd, sc.point_hidden) + linear_flops(n, sc.point_hidden, sc.num_parts);
  }
  return f;
}

std::string format_flops(const FlopBreakdown& f) {
  std::ostringstream os;
  char buf[128];
  auto row = [&](const char* name, std::uint64_t v) {
    std::snprintf(buf, sizeof buf, "%-14s %16llu  (%.3f G)\n", name, static_cast<unsigned long long>(v),
                  static_cast<double>(v) / 1e9);
    os << buf;
  };
  row("sampling", f.sampling);
  row("tokenizer", f.tokenizer);
  row("encoder", f.encoder);
  row("attention", f.attention);
  row("edgeconv", f.edgeconv);
  row("interactions", f.interactions);
  row("head", f.head);
  row("total", f.total());
  return os.str();
}

}  // namespace gft::model
