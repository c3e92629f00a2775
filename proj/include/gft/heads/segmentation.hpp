#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gft/backbone/embedding.hpp"
#include "gft/backbone/encoder.hpp"
#include "gft/numcore/params.hpp"
#include "gft/pointops/geometry.hpp"

namespace gft::heads {

struct SegDecoderConfig {
  std::size_t embed_dim = 384;
  std::size_t dec_dim = 384;
  std::size_t dec_blocks = 2;
  std::size_t dec_heads = 6;
  std::size_t dec_mlp_hidden = 512;
  std::size_t point_hidden = 256;
  std::size_t num_parts = 50;
  std::vector<int> taps{3, 6, 9, 11};
  std::size_t interp_neighbors = 3;
};

// Row-stochastic N x L matrix mapping token features onto points. Each point
// takes inverse-distance weights 1/(d + eps) over its `neighbors` nearest
// centers; a point at distance exactly 0 from a center takes that center's
// feature alone.
std::vector<double> interpolation_weights(std::span<const double> points, std::span<const double> centers,
                                          std::size_t neighbors, double eps = 1e-8);

// Skip-connection decoder: per-tap down projections, concat + linear fuse,
// self-attention blocks, propagation to points, then a per-point MLP on
// [propagated, global max] features.
class SegDecoder {
 public:
  SegDecoder(numcore::ParamStore& store, const std::string& prefix, const SegDecoderConfig& cfg);
  void init(std::mt19937_64& rng);

  // taps: encoder outputs keyed by layer, all (1+s+L) x D. Returns N x C logits.
  numcore::Tensor forward(const std::map<int, numcore::Tensor>& taps, const backbone::TokenLayout& layout,
                          const pointops::TokenizedCloud& geometry, const pointops::PointCloud& cloud) const;

  const SegDecoderConfig& config() const noexcept { return cfg_; }

 private:
  SegDecoderConfig cfg_;
  std::vector<numcore::Tensor> down_w_, down_b_;
  numcore::Tensor fuse_w_, fuse_b_;
  std::vector<backbone::EncoderLayerWeights> blocks_;
  numcore::Tensor norm_gain_, norm_bias_;
  numcore::Tensor point1_w_, point1_b_, point2_w_, point2_b_;
};

}  // namespace gft::heads
