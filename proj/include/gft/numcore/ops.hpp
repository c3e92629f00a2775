#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gft/numcore/tensor.hpp"

// Differentiable primitives. All of them treat their inputs as 2-D row-major
// matrices (a 1-D tensor of length n is a 1 x n row) unless stated otherwise.
// There is no implicit broadcasting; add_bias is the one row-broadcast.
namespace gft::numcore {

Tensor matmul(const Tensor& a, const Tensor& b);
// a * b^T without materialising the transpose.
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
// x[n x d] + bias[d] on every row.
Tensor add_bias(const Tensor& x, const Tensor& bias);
// x[n x d_in] * w[d_in x d_out] + b[d_out]
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);
// Exact (erf) GELU.
Tensor gelu(const Tensor& x);

// Softmax along `axis` of a 2-D tensor (or the only axis of a 1-D one);
// -1 means the last axis. Uses max subtraction. NaN inputs propagate.
Tensor softmax(const Tensor& x, int axis = -1);
Tensor log_softmax(const Tensor& x);
// Row-wise normalisation with affine gain/bias of length d.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count);
// out row i = x row indices[i]; repeated indices accumulate gradient.
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices);
// Each row repeated `times` times consecutively: [r0,r0,..,r1,r1,..].
Tensor repeat_rows(const Tensor& x, std::size_t times);
// Rows taken in consecutive blocks of `group`; per-column max of each block.
// Gradient goes to the first maximal row of the block.
Tensor group_max(const Tensor& x, std::size_t group);
// Per-column max over all rows -> 1 x d.
Tensor max_rows(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Inverted dropout with an explicit seed. p == 0 returns x unchanged.
Tensor dropout(const Tensor& x, double p, std::uint64_t seed);

// Mean over rows of -log softmax(logits)[label]. logits is B x C (or 1-D C).
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);
// Mean over rows of -logp[label]; logp rows are log-probabilities.
Tensor nll_loss(const Tensor& log_probs, std::span<const int> labels);

}  // namespace gft::numcore
