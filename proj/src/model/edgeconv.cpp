#include "gft/model/edgeconv.hpp"

#include "gft/errors.hpp"
#include "gft/numcore/ops.hpp"
#include "gft/pointops/geometry.hpp"

namespace gft::model {

using numcore::Tensor;
namespace ops = numcore;

namespace {
constexpr double kLeakySlope = 0.2;
}

Tensor token_edge_features(const Tensor& tokens, std::size_t k, std::vector<std::size_t>* neighbors) {
  const std::size_t n = tokens.rows();
  const std::size_t d = tokens.cols();
  std::vector<std::size_t> graph;
  if (neighbors != nullptr && !neighbors->empty()) {
    if (neighbors->size() != n * k) throw DimensionError("edge features: supplied graph has the wrong size");
    graph = *neighbors;
  } else {
    if (k == 0 || k + 1 > n) {
      throw ArgumentError("edge features: k=" + std::to_string(k) + " needs at least " + std::to_string(k + 1) +
                          " tokens, have " + std::to_string(n));
    }
    graph = pointops::knn(tokens.values(), tokens.values(), d, k, false);
    if (neighbors != nullptr) *neighbors = graph;
  }
  Tensor center = ops::repeat_rows(tokens, k);
  Tensor edge = ops::sub(ops::gather_rows(tokens, graph), center);
  return ops::concat_cols({center, edge});
}

Tensor edgeconv_layer(const Tensor& tokens, std::size_t k, const Tensor& weight, const Tensor& bias,
                      std::vector<std::size_t>* neighbors) {
  if (weight.rows() != 2 * tokens.cols()) {
    throw DimensionError("edgeconv: weight " + numcore::shape_str(weight.shape()) + " for " +
                         std::to_string(tokens.cols()) + "-wide tokens");
  }
  Tensor edges = token_edge_features(tokens, k, neighbors);
  return ops::group_max(ops::leaky_relu(ops::linear(edges, weight, bias), kLeakySlope), k);
}

EdgeConvPyramid::EdgeConvPyramid(numcore::ParamStore& store, const std::string& prefix, std::size_t in_dim,
                                 const EdgeConvConfig& cfg)
    : cfg_(cfg), in_dim_(in_dim) {
  std::size_t d_in = in_dim;
  std::size_t total = 0;
  for (std::size_t j = 0; j < cfg.dims.size(); ++j) {
    const std::string p = prefix + ".layers." + std::to_string(j);
    weights_.push_back(store.add(p + ".weight", {2 * d_in, cfg.dims[j]}, false));
    biases_.push_back(store.add(p + ".bias", {cfg.dims[j]}, false));
    d_in = cfg.dims[j];
    total += cfg.dims[j];
  }
  ffn1_w_ = store.add(prefix + ".ffn.fc1.weight", {total, cfg.ffn_dim}, false);
  ffn1_b_ = store.add(prefix + ".ffn.fc1.bias", {cfg.ffn_dim}, false);
  ffn2_w_ = store.add(prefix + ".ffn.fc2.weight", {cfg.ffn_dim, cfg.out_dim}, false);
  ffn2_b_ = store.add(prefix + ".ffn.fc2.bias", {cfg.out_dim}, false);
}

void EdgeConvPyramid::init(std::mt19937_64& rng) {
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    numcore::fill_xavier_uniform(weights_[j], weights_[j].rows(), weights_[j].cols(), rng);
    numcore::fill_constant(biases_[j], 0.0);
  }
  numcore::fill_xavier_uniform(ffn1_w_, ffn1_w_.rows(), ffn1_w_.cols(), rng);
  numcore::fill_xavier_uniform(ffn2_w_, ffn2_w_.rows(), ffn2_w_.cols(), rng);
  numcore::fill_constant(ffn1_b_, 0.0);
  numcore::fill_constant(ffn2_b_, 0.0);
}

PyramidFeatures EdgeConvPyramid::forward(const Tensor& tokens) const {
  if (tokens.cols() != in_dim_) {
    throw DimensionError("edgeconv pyramid expects " + std::to_string(in_dim_) + "-wide tokens, got " +
                         std::to_string(tokens.cols()));
  }
  PyramidFeatures out;
  std::vector<std::size_t> graph;
  Tensor x = tokens;
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    if (cfg_.dynamic_graph) graph.clear();
    x = edgeconv_layer(x, cfg_.k_graph, weights_[j], biases_[j], &graph);
    out.levels.push_back(x);
  }
  Tensor cat = out.levels.size() == 1 ? out.levels.front() : ops::concat_cols(out.levels);
  out.fused = ops::linear(ops::gelu(ops::linear(cat, ffn1_w_, ffn1_b_)), ffn2_w_, ffn2_b_);
  return out;
}

}  // namespace gft::model
