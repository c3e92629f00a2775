#pragma once

#include <random>
#include <string>
#include <vector>

#include "gft/model/config.hpp"
#include "gft/numcore/params.hpp"

namespace gft::model {

// Edge features of the token graph: for token i and its j-th nearest other
// token n_j (feature-space KNN, self excluded), row i*k + j holds
// [T_i, T_{n_j} - T_i]. Output is (n*k) x 2D. When `neighbors` is non-null
// and non-empty it is used as the graph; when non-null and empty it receives
// the graph that was computed.
numcore::Tensor token_edge_features(const numcore::Tensor& tokens, std::size_t k,
                                    std::vector<std::size_t>* neighbors = nullptr);

// One EdgeConv layer: shared linear on every edge feature, LeakyReLU(0.2),
// max over the k neighbours -> n x d_out.
numcore::Tensor edgeconv_layer(const numcore::Tensor& tokens, std::size_t k, const numcore::Tensor& weight,
                               const numcore::Tensor& bias, std::vector<std::size_t>* neighbors = nullptr);

struct PyramidFeatures {
  std::vector<numcore::Tensor> levels;  // M_1..M_r, each n x d_j
  numcore::Tensor fused;                // n x out_dim
};

class EdgeConvPyramid {
 public:
  EdgeConvPyramid(numcore::ParamStore& store, const std::string& prefix, std::size_t in_dim,
                  const EdgeConvConfig& cfg);
  void init(std::mt19937_64& rng);
  // `tokens` are the prompt + patch rows (no CLS).
  PyramidFeatures forward(const numcore::Tensor& tokens) const;

  const EdgeConvConfig& config() const noexcept { return cfg_; }

 private:
  EdgeConvConfig cfg_;
  std::size_t in_dim_;
  std::vector<numcore::Tensor> weights_, biases_;
  numcore::Tensor ffn1_w_, ffn1_b_, ffn2_w_, ffn2_b_;
};

}  // namespace gft::model
