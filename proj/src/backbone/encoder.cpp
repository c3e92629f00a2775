#include "gft/backbone/encoder.hpp"

#include <cmath>

#include "gft/errors.hpp"
#include "gft/numcore/ops.hpp"

namespace gft::backbone {

using numcore::Tensor;
namespace ops = numcore;

EncoderLayerWeights::EncoderLayerWeights(numcore::ParamStore& store, const std::string& prefix, std::size_t dim,
                                         std::size_t heads_, std::size_t mlp_hidden, bool frozen)
    : heads(heads_) {
  if (heads == 0 || dim % heads != 0) {
    throw ArgumentError("encoder: " + std::to_string(heads) + " heads do not divide D=" + std::to_string(dim));
  }
  ln1_gain = store.add(prefix + ".norm1.gain", {dim}, frozen);
  ln1_bias = store.add(prefix + ".norm1.bias", {dim}, frozen);
  qkv_w = store.add(prefix + ".attn.qkv.weight", {dim, 3 * dim}, frozen);
  qkv_b = store.add(prefix + ".attn.qkv.bias", {3 * dim}, frozen);
  proj_w = store.add(prefix + ".attn.proj.weight", {dim, dim}, frozen);
  proj_b = store.add(prefix + ".attn.proj.bias", {dim}, frozen);
  ln2_gain = store.add(prefix + ".norm2.gain", {dim}, frozen);
  ln2_bias = store.add(prefix + ".norm2.bias", {dim}, frozen);
  fc1_w = store.add(prefix + ".mlp.fc1.weight", {dim, mlp_hidden}, frozen);
  fc1_b = store.add(prefix + ".mlp.fc1.bias", {mlp_hidden}, frozen);
  fc2_w = store.add(prefix + ".mlp.fc2.weight", {mlp_hidden, dim}, frozen);
  fc2_b = store.add(prefix + ".mlp.fc2.bias", {dim}, frozen);
}

void EncoderLayerWeights::init(std::mt19937_64& rng, double stddev) {
  for (Tensor* t : {&qkv_w, &proj_w, &fc1_w, &fc2_w}) numcore::fill_normal(*t, stddev, rng);
  for (Tensor* t : {&qkv_b, &proj_b, &fc1_b, &fc2_b, &ln1_bias, &ln2_bias}) numcore::fill_constant(*t, 0.0);
  numcore::fill_constant(ln1_gain, 1.0);
  numcore::fill_constant(ln2_gain, 1.0);
}

Tensor multi_head_attention(const Tensor& queries, const Tensor& keys, const Tensor& values, std::size_t heads,
                            std::vector<Tensor>* weights_out) {
  const std::size_t width = queries.cols();
  if (heads == 0 || width % heads != 0 || keys.cols() != width || values.cols() != width) {
    throw DimensionError("attention: widths " + std::to_string(width) + "/" + std::to_string(keys.cols()) + "/" +
                         std::to_string(values.cols()) + " incompatible with " + std::to_string(heads) + " heads");
  }
  if (keys.rows() != values.rows()) throw DimensionError("attention: key and value row counts differ");
  const std::size_t head_dim = width / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::vector<Tensor> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    Tensor q = heads == 1 ? queries : ops::slice_cols(queries, h * head_dim, head_dim);
    Tensor k = heads == 1 ? keys : ops::slice_cols(keys, h * head_dim, head_dim);
    Tensor v = heads == 1 ? values : ops::slice_cols(values, h * head_dim, head_dim);
    Tensor a = ops::softmax(ops::scale(ops::matmul_nt(q, k), inv_sqrt));
    if (weights_out != nullptr) weights_out->push_back(a.detach());
    outs.push_back(ops::matmul(a, v));
  }
  return heads == 1 ? outs.front() : ops::concat_cols(outs);
}

Tensor self_attention_layer(const Tensor& e, const EncoderLayerWeights& w, std::vector<Tensor>* attention_out) {
  const std::size_t dim = e.cols();
  if (w.ln1_gain.size() != dim) {
    throw DimensionError("encoder layer expects D=" + std::to_string(w.ln1_gain.size()) + ", got " +
                         std::to_string(dim));
  }
  Tensor qkv = ops::linear(ops::layer_norm(e, w.ln1_gain, w.ln1_bias), w.qkv_w, w.qkv_b);
  Tensor attn = multi_head_attention(ops::slice_cols(qkv, 0, dim), ops::slice_cols(qkv, dim, dim),
                                     ops::slice_cols(qkv, 2 * dim, dim), w.heads, attention_out);
  Tensor x = ops::add(e, ops::linear(attn, w.proj_w, w.proj_b));
  Tensor hidden = ops::gelu(ops::linear(ops::layer_norm(x, w.ln2_gain, w.ln2_bias), w.fc1_w, w.fc1_b));
  return ops::add(x, ops::linear(hidden, w.fc2_w, w.fc2_b));
}

EncodeResult encode(const Tensor& e0, const std::vector<EncoderLayerWeights>& layers, const EncodeRequest& request) {
  const int depth = static_cast<int>(layers.size());
  auto check = [depth](int i, const char* what) {
    if (i < 1 || i > depth) {
      throw ArgumentError(std::string("encode: ") + what + " index " + std::to_string(i) + " outside [1, " +
                          std::to_string(depth) + "]");
    }
  };
  for (const auto& [i, hook] : request.before_layer) check(i, "hook");
  for (int i : request.taps) check(i, "tap");
  for (int i : request.attention_layers) check(i, "attention");

  EncodeResult result;
  Tensor x = e0;
  for (int i = 1; i <= depth; ++i) {
    if (auto it = request.before_layer.find(i); it != request.before_layer.end()) {
      Tensor rewritten = it->second(x);
      if (rewritten.shape() != x.shape()) {
        throw ContractError("encode: hook before layer " + std::to_string(i) + " changed shape " +
                            numcore::shape_str(x.shape()) + " to " + numcore::shape_str(rewritten.shape()));
      }
      x = rewritten;
    }
    std::vector<Tensor> maps;
    const bool want_attention = request.attention_layers.count(i) != 0;
    x = self_attention_layer(x, layers[static_cast<std::size_t>(i - 1)], want_attention ? &maps : nullptr);
    if (want_attention) result.attention[i] = std::move(maps);
    if (request.taps.count(i)) result.taps[i] = x;
  }
  result.final = x;
  return result;
}

}  // namespace gft::backbone
