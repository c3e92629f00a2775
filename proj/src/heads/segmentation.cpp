#include "gft/heads/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gft/errors.hpp"
#include "gft/numcore/ops.hpp"

namespace gft::heads {

using numcore::Tensor;
namespace ops = numcore;

std::vector<double> interpolation_weights(std::span<const double> points, std::span<const double> centers,
                                          std::size_t neighbors, double eps) {
  const std::size_t n = points.size() / 3;
  const std::size_t l = centers.size() / 3;
  const std::size_t k = std::min(neighbors, l);
  if (k == 0) throw ArgumentError("interpolation needs at least one center");
  const auto nearest = pointops::knn(points, centers, 3, k, true);
  std::vector<double> w(n * l, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> dist(k);
    std::size_t hit = l;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t c = nearest[i * k + j];
      double s = 0.0;
      for (std::size_t d = 0; d < 3; ++d) {
        const double diff = points[i * 3 + d] - centers[c * 3 + d];
        s += diff * diff;
      }
      dist[j] = std::sqrt(s);
      if (dist[j] == 0.0 && hit == l) hit = c;
    }
    if (hit != l) {
      w[i * l + hit] = 1.0;
      continue;
    }
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) total += 1.0 / (dist[j] + eps);
    for (std::size_t j = 0; j < k; ++j) w[i * l + nearest[i * k + j]] += (1.0 / (dist[j] + eps)) / total;
  }
  return w;
}

SegDecoder::SegDecoder(numcore::ParamStore& store, const std::string& prefix, const SegDecoderConfig& cfg)
    : cfg_(cfg) {
  for (std::size_t t = 0; t < cfg.taps.size(); ++t) {
    const std::string p = prefix + ".down" + std::to_string(t);
    down_w_.push_back(store.add(p + ".weight", {cfg.embed_dim, cfg.dec_dim}, false));
    down_b_.push_back(store.add(p + ".bias", {cfg.dec_dim}, false));
  }
  fuse_w_ = store.add(prefix + ".fuse.weight", {cfg.taps.size() * cfg.dec_dim, cfg.dec_dim}, false);
  fuse_b_ = store.add(prefix + ".fuse.bias", {cfg.dec_dim}, false);
  for (std::size_t b = 0; b < cfg.dec_blocks; ++b) {
    blocks_.emplace_back(store, prefix + ".blocks." + std::to_string(b), cfg.dec_dim, cfg.dec_heads,
                         cfg.dec_mlp_hidden, false);
  }
  norm_gain_ = store.add(prefix + ".norm.gain", {cfg.dec_dim}, false);
  norm_bias_ = store.add(prefix + ".norm.bias", {cfg.dec_dim}, false);
  point1_w_ = store.add(prefix + ".point.fc1.weight", {2 * cfg.dec_dim, cfg.point_hidden}, false);
  point1_b_ = store.add(prefix + ".point.fc1.bias", {cfg.point_hidden}, false);
  point2_w_ = store.add(prefix + ".point.fc2.weight", {cfg.point_hidden, cfg.num_parts}, false);
  point2_b_ = store.add(prefix + ".point.fc2.bias", {cfg.num_parts}, false);
}

void SegDecoder::init(std::mt19937_64& rng) {
  for (std::size_t t = 0; t < down_w_.size(); ++t) {
    numcore::fill_xavier_uniform(down_w_[t], down_w_[t].rows(), down_w_[t].cols(), rng);
    numcore::fill_constant(down_b_[t], 0.0);
  }
  numcore::fill_xavier_uniform(fuse_w_, fuse_w_.rows(), fuse_w_.cols(), rng);
  numcore::fill_constant(fuse_b_, 0.0);
  for (auto& b : blocks_) b.init(rng, 0.02);
  numcore::fill_constant(norm_gain_, 1.0);
  numcore::fill_constant(norm_bias_, 0.0);
  numcore::fill_xavier_uniform(point1_w_, point1_w_.rows(), point1_w_.cols(), rng);
  numcore::fill_xavier_uniform(point2_w_, point2_w_.rows(), point2_w_.cols(), rng);
  numcore::fill_constant(point1_b_, 0.0);
  numcore::fill_constant(point2_b_, 0.0);
}

Tensor SegDecoder::forward(const std::map<int, Tensor>& taps, const backbone::TokenLayout& layout,
                           const pointops::TokenizedCloud& geometry, const pointops::PointCloud& cloud) const {
  std::vector<Tensor> projected;
  for (std::size_t t = 0; t < cfg_.taps.size(); ++t) {
    auto it = taps.find(cfg_.taps[t]);
    if (it == taps.end()) throw ArgumentError("segmentation: missing encoder tap " + std::to_string(cfg_.taps[t]));
    projected.push_back(ops::linear(it->second, down_w_[t], down_b_[t]));
  }
  Tensor x = ops::linear(projected.size() == 1 ? projected.front() : ops::concat_cols(projected), fuse_w_, fuse_b_);
  for (const auto& b : blocks_) x = backbone::self_attention_layer(x, b);
  x = ops::layer_norm(x, norm_gain_, norm_bias_);
  Tensor patches = ops::slice_rows(x, layout.patch_begin(), layout.patches);

  const std::size_t n = cloud.size();
  Tensor interp({n, layout.patches},
                interpolation_weights(cloud.xyz, geometry.centers, cfg_.interp_neighbors));
  Tensor local = ops::matmul(interp, patches);
  Tensor global = ops::repeat_rows(ops::max_rows(patches), n);
  Tensor h = ops::relu(ops::linear(ops::concat_cols({local, global}), point1_w_, point1_b_));
  return ops::linear(h, point2_w_, point2_b_);
}

}  // namespace gft::heads
