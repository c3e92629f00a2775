#include "gft/heads/classifier.hpp"

#include "gft/errors.hpp"
#include "gft/numcore/ops.hpp"

namespace gft::heads {

using numcore::Tensor;
namespace ops = numcore;

Tensor pool_tokens(const Tensor& tokens, const backbone::TokenLayout& layout, const PoolingSlots& slots) {
  const std::size_t d = tokens.cols();
  if (tokens.rows() != layout.rows()) throw DimensionError("pool_tokens: embedding rows do not match the layout");
  const Tensor zero = Tensor::zeros({1, d});
  Tensor cls = slots.cls ? ops::slice_rows(tokens, 0, 1) : zero;
  Tensor patches = slots.patches && layout.patches > 0
                       ? ops::max_rows(ops::slice_rows(tokens, layout.patch_begin(), layout.patches))
                       : zero;
  Tensor prompts = slots.prompts && layout.prompts > 0
                       ? ops::max_rows(ops::slice_rows(tokens, layout.prompt_begin(), layout.prompts))
                       : zero;
  return ops::concat_cols({cls, patches, prompts});
}

ClassifierHead::ClassifierHead(numcore::ParamStore& store, const std::string& prefix, std::size_t in_dim,
                               const std::vector<std::size_t>& hidden, std::size_t num_classes, double dropout)
    : in_dim_(in_dim), dropout_(dropout) {
  std::size_t d = in_dim;
  std::vector<std::size_t> widths = hidden;
  widths.push_back(num_classes);
  for (std::size_t j = 0; j < widths.size(); ++j) {
    const std::string p = prefix + ".fc" + std::to_string(j);
    weights_.push_back(store.add(p + ".weight", {d, widths[j]}, false));
    biases_.push_back(store.add(p + ".bias", {widths[j]}, false));
    d = widths[j];
  }
}

void ClassifierHead::init(std::mt19937_64& rng) {
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    numcore::fill_xavier_uniform(weights_[j], weights_[j].rows(), weights_[j].cols(), rng);
    numcore::fill_constant(biases_[j], 0.0);
  }
}

Tensor ClassifierHead::forward(const Tensor& pooled, bool training, std::uint64_t seed) const {
  if (pooled.size() != in_dim_) {
    throw DimensionError("classifier expects " + std::to_string(in_dim_) + " features, got " +
                         std::to_string(pooled.size()));
  }
  Tensor x = ops::reshape(pooled, {1, in_dim_});
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    x = ops::linear(x, weights_[j], biases_[j]);
    if (j + 1 < weights_.size()) {
      x = ops::relu(x);
      if (training) x = ops::dropout(x, dropout_, seed * 1000003ULL + j);
    }
  }
  return x;
}

int argmax(std::span<const double> logits) {
  int best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i)
    if (logits[i] > logits[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

}  // namespace gft::heads
