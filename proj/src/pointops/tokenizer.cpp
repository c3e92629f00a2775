#include "gft/pointops/tokenizer.hpp"

#include <cmath>

#include "gft/errors.hpp"
#include "gft/numcore/ops.hpp"

namespace gft::pointops {

using numcore::Tensor;
namespace ops = numcore;

TokenizerWeights::TokenizerWeights(numcore::ParamStore& store, const std::string& prefix, std::size_t hidden,
                                   std::size_t dim, bool unlock_first_layer)
    : hidden_(hidden), dim_(dim) {
  first_w = store.add(prefix + ".first.weight", {3, hidden}, !unlock_first_layer);
  first_b = store.add(prefix + ".first.bias", {hidden}, !unlock_first_layer);
  second_w = store.add(prefix + ".second.weight", {2 * hidden, dim}, true);
  second_b = store.add(prefix + ".second.bias", {dim}, true);
}

void TokenizerWeights::init(std::mt19937_64& rng) {
  // Stand-in for a pretrained, batch-normalised tokenizer: He-scaled so the
  // patch tokens have O(1) magnitude.
  numcore::fill_normal(first_w, std::sqrt(2.0 / 3.0), rng);
  numcore::fill_normal(second_w, std::sqrt(2.0 / static_cast<double>(2 * hidden_)), rng);
  numcore::fill_constant(first_b, 0.0);
  numcore::fill_constant(second_b, 0.0);
}

Tensor TokenizerWeights::embed(const TokenizedCloud& geometry) const {
  const std::size_t k = geometry.group_size;
  Tensor x({geometry.num_groups * k, 3}, geometry.group_coords);
  Tensor h = ops::relu(ops::linear(x, first_w, first_b));
  Tensor pooled = ops::repeat_rows(ops::group_max(h, k), k);
  Tensor f = ops::linear(ops::concat_cols({pooled, h}), second_w, second_b);
  return ops::group_max(f, k);
}

backbone::EmbeddingMatrix tokenize(const PointCloud& cloud, std::size_t num_groups, std::size_t group_size,
                                   const TokenizerWeights& weights, const Tensor& cls_token,
                                   TokenizedCloud* geometry_out) {
  if (num_groups == 0 || group_size == 0) throw ArgumentError("tokenize: group count and size must be positive");
  if (cloud.size() < num_groups || cloud.size() < group_size) {
    throw ArgumentError("tokenize: cloud of " + std::to_string(cloud.size()) + " points cannot form " +
                        std::to_string(num_groups) + " groups of " + std::to_string(group_size));
  }
  if (cls_token.size() != weights.dim()) throw DimensionError("tokenize: CLS token width differs from D");
  TokenizedCloud geometry = group_points(cloud, num_groups, group_size);
  Tensor patches = weights.embed(geometry);
  backbone::EmbeddingMatrix e;
  e.data = ops::concat_rows({ops::reshape(cls_token, {1, weights.dim()}), patches});
  e.layout.patches = num_groups;
  if (geometry_out != nullptr) *geometry_out = std::move(geometry);
  return e;
}

}  // namespace gft::pointops
