#pragma once

#include <random>
#include <string>
#include <vector>

#include "gft/numcore/params.hpp"

namespace gft::model {

// Cross-attention adapter: queries from the encoder stream, keys/values from
// the graph features.
//   E' = E + Out( MHA( LN_e(E) Wq, LN_m(M) Wk, LN_m(M) Wv ) )
// Out is zero at initialisation, so a fresh block is the identity.
class InteractionBlock {
 public:
  InteractionBlock(numcore::ParamStore& store, const std::string& prefix, std::size_t embed_dim,
                   std::size_t graph_dim, std::size_t attn_dim, std::size_t heads);
  void init(std::mt19937_64& rng);

  // e: (1+s+L) x D, m: (s+L) x d. Throws ContractError if m.rows() + 1 != e.rows().
  numcore::Tensor forward(const numcore::Tensor& e, const numcore::Tensor& m,
                          std::vector<numcore::Tensor>* attention_out = nullptr) const;

  numcore::Tensor norm_e_gain, norm_e_bias, norm_m_gain, norm_m_bias;
  numcore::Tensor q_w, q_b, k_w, k_b, v_w, v_b, out_w, out_b;

 private:
  std::size_t heads_;
};

}  // namespace gft::model
