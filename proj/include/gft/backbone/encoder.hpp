#pragma once

#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gft/backbone/embedding.hpp"
#include "gft/numcore/params.hpp"

namespace gft::backbone {

// One pre-norm transformer block: x + Attn(LN1(x)), then + MLP(LN2(.)).
struct EncoderLayerWeights {
  numcore::Tensor ln1_gain, ln1_bias;
  numcore::Tensor qkv_w, qkv_b;  // D x 3D
  numcore::Tensor proj_w, proj_b;
  numcore::Tensor ln2_gain, ln2_bias;
  numcore::Tensor fc1_w, fc1_b;  // D x hidden
  numcore::Tensor fc2_w, fc2_b;
  std::size_t heads = 1;

  EncoderLayerWeights() = default;
  EncoderLayerWeights(numcore::ParamStore& store, const std::string& prefix, std::size_t dim, std::size_t heads,
                      std::size_t mlp_hidden, bool frozen);
  // N(0, stddev) matrices, zero biases, identity norms.
  void init(std::mt19937_64& rng, double stddev);
};

// Multi-head scaled dot-product attention of `queries` over `keys`/`values`
// already projected to width heads*head_dim. When `weights_out` is non-null
// it receives `heads` row-stochastic matrices (Rq x Rk).
numcore::Tensor multi_head_attention(const numcore::Tensor& queries, const numcore::Tensor& keys,
                                     const numcore::Tensor& values, std::size_t heads,
                                     std::vector<numcore::Tensor>* weights_out = nullptr);

numcore::Tensor self_attention_layer(const numcore::Tensor& e, const EncoderLayerWeights& w,
                                     std::vector<numcore::Tensor>* attention_out = nullptr);

// Hook rewriting E_{i-1} right before layer i runs. Must be pure.
using LayerHook = std::function<numcore::Tensor(const numcore::Tensor&)>;

struct EncodeRequest {
  std::map<int, LayerHook> before_layer;  // 1-based layer index
  std::set<int> taps;                     // return E_i (output of layer i)
  std::set<int> attention_layers;         // return layer i's attention maps
};

struct EncodeResult {
  numcore::Tensor final;
  std::map<int, numcore::Tensor> taps;
  std::map<int, std::vector<numcore::Tensor>> attention;  // heads x (R x R)
};

// Runs the layers in order. Throws ArgumentError for hook, tap or attention
// indices outside [1, F].
EncodeResult encode(const numcore::Tensor& e0, const std::vector<EncoderLayerWeights>& layers,
                    const EncodeRequest& request = {});

}  // namespace gft::backbone
