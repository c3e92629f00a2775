#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gft/model/config.hpp"
#include "gft/numcore/params.hpp"

namespace gft::model {

struct LedgerEntry {
  std::string name;
  std::size_t count = 0;
  bool frozen = true;
};

struct ParamLedger {
  std::vector<LedgerEntry> entries;  // store order
  std::size_t trainable = 0;
  std::size_t total = 0;
  double trainable_percent() const;
};

ParamLedger count_trainable_params(const numcore::ParamStore& store);

// Full listing plus the summary line "#TP (M): 0.76 (3.44%)".
std::string format_ledger(const ParamLedger& ledger, bool with_entries = true);

struct FlopBreakdown {
  std::uint64_t sampling = 0;   // FPS + grouping KNN
  std::uint64_t tokenizer = 0;
  std::uint64_t encoder = 0;    // projections + MLPs
  std::uint64_t attention = 0;  // score and mixing products of self-attention
  std::uint64_t edgeconv = 0;   // token KNN + edge linears + FFN
  std::uint64_t interactions = 0;
  std::uint64_t head = 0;
  std::uint64_t total() const;
};

// Inference cost at 2 FLOPs per multiply-add. A distance evaluation in d
// dimensions counts as d multiply-adds. Elementwise work (norms, softmax,
// activations) is not counted.
FlopBreakdown estimate_flops(const GftModelConfig& cfg, std::size_t num_points);

std::string format_flops(const FlopBreakdown& flops);

}  // namespace gft::model
