#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gft/backbone/embedding.hpp"
#include "gft/numcore/params.hpp"

namespace gft::heads {

struct PoolingSlots {
  bool cls = true;
  bool patches = true;
  bool prompts = true;
};

// [T_cls, max over patch rows, max over prompt rows] -> 1 x 3D. A disabled
// slot, or the prompt slot when there are no prompts, is zero.
numcore::Tensor pool_tokens(const numcore::Tensor& tokens, const backbone::TokenLayout& layout,
                            const PoolingSlots& slots = {});

// MLP in -> hidden... -> C with ReLU and dropout after every hidden layer.
class ClassifierHead {
 public:
  ClassifierHead(numcore::ParamStore& store, const std::string& prefix, std::size_t in_dim,
                 const std::vector<std::size_t>& hidden, std::size_t num_classes, double dropout);
  void init(std::mt19937_64& rng);

  // Dropout only when `training`; each layer derives its mask seed from `seed`.
  numcore::Tensor forward(const numcore::Tensor& pooled, bool training = false, std::uint64_t seed = 0) const;

  std::size_t in_dim() const noexcept { return in_dim_; }

 private:
  std::size_t in_dim_;
  double dropout_;
  std::vector<numcore::Tensor> weights_, biases_;
};

// Index of the largest logit, ties to the lowest index.
int argmax(std::span<const double> logits);

}  // namespace gft::heads
