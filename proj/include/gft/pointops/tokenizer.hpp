#pragma once

#include <random>
#include <string>

#include "gft/backbone/embedding.hpp"
#include "gft/numcore/params.hpp"
#include "gft/pointops/geometry.hpp"

namespace gft::pointops {

// Mini-PointNet patch embedder:
//   h = relu(x W1 + b1)               per point, 3 -> hidden   (first layer)
//   f = [max_k h, h] W2 + b2          per point, 2*hidden -> D
//   token = max_k f
// Only the first layer can be unlocked for fine-tuning.
class TokenizerWeights {
 public:
  TokenizerWeights(numcore::ParamStore& store, const std::string& prefix, std::size_t hidden, std::size_t dim,
                   bool unlock_first_layer);

  void init(std::mt19937_64& rng);
  numcore::Tensor embed(const TokenizedCloud& geometry) const;

  std::size_t hidden() const noexcept { return hidden_; }
  std::size_t dim() const noexcept { return dim_; }

  numcore::Tensor first_w, first_b, second_w, second_b;

 private:
  std::size_t hidden_;
  std::size_t dim_;
};

// E0 = [cls; T_1..T_L]. The geometry used is written to `geometry_out` when
// non-null. An all-identical cloud is accepted: every group collapses onto
// the same point.
backbone::EmbeddingMatrix tokenize(const PointCloud& cloud, std::size_t num_groups, std::size_t group_size,
                                   const TokenizerWeights& weights, const numcore::Tensor& cls_token,
                                   TokenizedCloud* geometry_out = nullptr);

}  // namespace gft::pointops
