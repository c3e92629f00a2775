#include "gft/model/interaction.hpp"

#include "gft/backbone/encoder.hpp"
#include "gft/errors.hpp"
#include "gft/numcore/ops.hpp"

namespace gft::model {

using numcore::Tensor;
namespace ops = numcore;

InteractionBlock::InteractionBlock(numcore::ParamStore& store, const std::string& prefix, std::size_t embed_dim,
                                   std::size_t graph_dim, std::size_t attn_dim, std::size_t heads)
    : heads_(heads) {
  if (heads == 0 || attn_dim % heads != 0) throw ArgumentError("interaction: heads must divide attention width");
  norm_e_gain = store.add(prefix + ".norm_e.gain", {embed_dim}, false);
  norm_e_bias = store.add(prefix + ".norm_e.bias", {embed_dim}, false);
  norm_m_gain = store.add(prefix + ".norm_m.gain", {graph_dim}, false);
  norm_m_bias = store.add(prefix + ".norm_m.bias", {graph_dim}, false);
  q_w = store.add(prefix + ".q.weight", {embed_dim, attn_dim}, false);
  q_b = store.add(prefix + ".q.bias", {attn_dim}, false);
  k_w = store.add(prefix + ".k.weight", {graph_dim, attn_dim}, false);
  k_b = store.add(prefix + ".k.bias", {attn_dim}, false);
  v_w = store.add(prefix + ".v.weight", {graph_dim, attn_dim}, false);
  v_b = store.add(prefix + ".v.bias", {attn_dim}, false);
  out_w = store.add(prefix + ".out.weight", {attn_dim, embed_dim}, false);
  out_b = store.add(prefix + ".out.bias", {embed_dim}, false);
}

void InteractionBlock::init(std::mt19937_64& rng) {
  for (Tensor* w : {&q_w, &k_w, &v_w}) numcore::fill_xavier_uniform(*w, w->rows(), w->cols(), rng);
  for (Tensor* b : {&q_b, &k_b, &v_b, &out_w, &out_b, &norm_e_bias, &norm_m_bias}) numcore::fill_constant(*b, 0.0);
  numcore::fill_constant(norm_e_gain, 1.0);
  numcore::fill_constant(norm_m_gain, 1.0);
}

Tensor InteractionBlock::forward(const Tensor& e, const Tensor& m, std::vector<Tensor>* attention_out) const {
  if (m.rows() + 1 != e.rows()) {
    throw ContractError("interaction: graph features have " + std::to_string(m.rows()) +
                        " rows, embedding has " + std::to_string(e.rows()) + " (expected one extra CLS row)");
  }
  Tensor mn = ops::layer_norm(m, norm_m_gain, norm_m_bias);
  Tensor q = ops::linear(ops::layer_norm(e, norm_e_gain, norm_e_bias), q_w, q_b);
  Tensor k = ops::linear(mn, k_w, k_b);
  Tensor v = ops::linear(mn, v_w, v_b);
  Tensor attended = backbone::multi_head_attention(q, k, v, heads_, attention_out);
  return ops::add(e, ops::linear(attended, out_w, out_b));
}

}  // namespace gft::model
