#include "gft/numcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "gft/errors.hpp"
#include "gft/numcore/kernels.hpp"

namespace gft::numcore {

namespace {

struct Dims {
  std::size_t r;
  std::size_t c;
};

Dims dims2(const Tensor& t) {
  if (t.ndim() == 1) return {1, t.size()};
  return {t.shape().front(), t.size() / t.shape().front()};
}

using BackwardFn = std::function<void(Node&)>;

Tensor make_op(Shape shape, std::vector<double> value, std::initializer_list<Tensor> inputs, BackwardFn fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  Tape* tape = active_tape();
  bool needs = false;
  for (const auto& in : inputs) needs = needs || in.requires_grad();
  if (tape != nullptr && needs) {
    node->requires_grad = true;
    for (const auto& in : inputs) node->parents.push_back(in.node());
    node->backward = std::move(fn);
    tape->record(node);
  }
  return Tensor(std::move(node));
}

Tensor make_op_n(Shape shape, std::vector<double> value, const std::vector<Tensor>& inputs, BackwardFn fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  Tape* tape = active_tape();
  bool needs = false;
  for (const auto& in : inputs) needs = needs || in.requires_grad();
  if (tape != nullptr && needs) {
    node->requires_grad = true;
    for (const auto& in : inputs) node->parents.push_back(in.node());
    node->backward = std::move(fn);
    tape->record(node);
  }
  return Tensor(std::move(node));
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                         " differ");
  }
}

template <typename F, typename G>
Tensor unary(const Tensor& x, F f, G df) {
  std::vector<double> out(x.size());
  const auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(xv[i]);
  return make_op(x.shape(), std::move(out), {x}, [df](Node& n) {
    auto& p = *n.parents[0];
    auto& g = p.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * df(p.value[i], n.value[i]);
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  const auto [m, k] = dims2(a);
  const auto [k2, n] = dims2(b);
  if (k != k2) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  std::vector<double> out(m * n);
  kernels::matmul_nn(a.values(), b.values(), out, m, k, n, false);
  return make_op({m, n}, std::move(out), {a, b}, [m, k, n](Node& o) {
    auto& pa = *o.parents[0];
    auto& pb = *o.parents[1];
    if (pa.requires_grad) kernels::matmul_nt(o.grad, pb.value, pa.ensure_grad(), m, n, k, true);
    if (pb.requires_grad) kernels::matmul_tn(pa.value, o.grad, pb.ensure_grad(), k, m, n, true);
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  const auto [m, k] = dims2(a);
  const auto [n, k2] = dims2(b);
  if (k != k2) {
    throw DimensionError("matmul_nt: inner dimensions differ, " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()) + "^T");
  }
  std::vector<double> out(m * n);
  kernels::matmul_nt(a.values(), b.values(), out, m, k, n, false);
  return make_op({m, n}, std::move(out), {a, b}, [m, k, n](Node& o) {
    auto& pa = *o.parents[0];
    auto& pb = *o.parents[1];
    // dA = dC * B, dB = dC^T * A
    if (pa.requires_grad) kernels::matmul_nn(o.grad, pb.value, pa.ensure_grad(), m, n, k, true);
    if (pb.requires_grad) kernels::matmul_tn(o.grad, pa.value, pb.ensure_grad(), n, m, k, true);
  });
}

Tensor transpose(const Tensor& a) {
  const auto [r, c] = dims2(a);
  std::vector<double> out(r * c);
  const auto av = a.values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = av[i * c + j];
  return make_op({c, r}, std::move(out), {a}, [r, c](Node& o) {
    auto& g = o.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += o.grad[j * r + i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](Node& o) {
    for (auto& p : o.parents) {
      if (!p->requires_grad) continue;
      auto& g = p->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] - b.values()[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](Node& o) {
    if (o.parents[0]->requires_grad) {
      auto& g = o.parents[0]->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    }
    if (o.parents[1]->requires_grad) {
      auto& g = o.parents[1]->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= o.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](Node& o) {
    auto& pa = *o.parents[0];
    auto& pb = *o.parents[1];
    if (pa.requires_grad) {
      auto& g = pa.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      auto& g = pb.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * pa.value[i];
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * s;
  return make_op(a.shape(), std::move(out), {a}, [s](Node& o) {
    auto& g = o.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * s;
  });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  const auto [r, c] = dims2(x);
  if (bias.size() != c) {
    throw DimensionError("add_bias: bias " + shape_str(bias.shape()) + " does not match rows of " +
                         shape_str(x.shape()));
  }
  std::vector<double> out(x.values().begin(), x.values().end());
  const auto bv = bias.values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += bv[j];
  return make_op(x.shape(), std::move(out), {x, bias}, [r, c](Node& o) {
    if (o.parents[0]->requires_grad) {
      auto& g = o.parents[0]->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    }
    if (o.parents[1]->requires_grad) {
      auto& g = o.parents[1]->ensure_grad();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[j] += o.grad[i * c + j];
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) { return add_bias(matmul(x, w), b); }

Tensor relu(const Tensor& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  return unary(
      x, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Tensor gelu(const Tensor& x) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return unary(
      x, [](double v) { return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2)); },
      [inv_sqrt_2pi](double v, double) {
        return 0.5 * (1.0 + std::erf(v * kInvSqrt2)) + v * std::exp(-0.5 * v * v) * inv_sqrt_2pi;
      });
}

Tensor softmax(const Tensor& x, int axis) {
  const int last = static_cast<int>(std::max<std::size_t>(x.ndim(), 1)) - 1;
  if (axis < 0) axis += last + 1;
  if (axis < 0 || axis > last) throw ArgumentError("softmax: axis out of range");
  if (axis != last) {
    if (x.ndim() != 2) throw ArgumentError("softmax: non-last axis only supported for 2-D tensors");
    return transpose(softmax(transpose(x), -1));
  }
  const auto [r, c] = dims2(x);
  std::vector<double> out(x.size());
  const auto xv = x.values();
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = xv.data() + i * c;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j) mx = std::max(mx, row[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      out[i * c + j] = std::exp(row[j] - mx);
      s += out[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= s;
  }
  return make_op(x.shape(), std::move(out), {x}, [r, c](Node& o) {
    auto& g = o.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < r; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += o.grad[i * c + j] * o.value[i * c + j];
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += o.value[i * c + j] * (o.grad[i * c + j] - dot);
    }
  });
}

Tensor log_softmax(const Tensor& x) {
  const auto [r, c] = dims2(x);
  std::vector<double> out(x.size());
  const auto xv = x.values();
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = xv.data() + i * c;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j) mx = std::max(mx, row[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += std::exp(row[j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = row[j] - lse;
  }
  return make_op(x.shape(), std::move(out), {x}, [r, c](Node& o) {
    auto& g = o.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < r; ++i) {
      double gs = 0.0;
      for (std::size_t j = 0; j < c; ++j) gs += o.grad[i * c + j];
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += o.grad[i * c + j] - std::exp(o.value[i * c + j]) * gs;
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  const auto [r, c] = dims2(x);
  if (gain.size() != c || bias.size() != c) {
    throw DimensionError("layer_norm: affine parameters must have length " + std::to_string(c));
  }
  std::vector<double> xhat(x.size());
  std::vector<double> inv_std(r);
  std::vector<double> out(x.size());
  const auto xv = x.values();
  const auto gv = gain.values();
  const auto bv = bias.values();
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = xv.data() + i * c;
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += row[j];
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(c);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) {
      xhat[i * c + j] = (row[j] - mu) * inv_std[i];
      out[i * c + j] = xhat[i * c + j] * gv[j] + bv[j];
    }
  }
  return make_op(x.shape(), std::move(out), {x, gain, bias},
                 [r, c, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& o) {
                   auto& px = *o.parents[0];
                   auto& pg = *o.parents[1];
                   auto& pb = *o.parents[2];
                   if (pg.requires_grad) {
                     auto& g = pg.ensure_grad();
                     for (std::size_t i = 0; i < r; ++i)
                       for (std::size_t j = 0; j < c; ++j) g[j] += o.grad[i * c + j] * xhat[i * c + j];
                   }
                   if (pb.requires_grad) {
                     auto& g = pb.ensure_grad();
                     for (std::size_t i = 0; i < r; ++i)
                       for (std::size_t j = 0; j < c; ++j) g[j] += o.grad[i * c + j];
                   }
                   if (px.requires_grad) {
                     auto& g = px.ensure_grad();
                     const double inv_c = 1.0 / static_cast<double>(c);
                     for (std::size_t i = 0; i < r; ++i) {
                       double m1 = 0.0;
                       double m2 = 0.0;
                       for (std::size_t j = 0; j < c; ++j) {
                         const double dxh = o.grad[i * c + j] * pg.value[j];
                         m1 += dxh;
                         m2 += dxh * xhat[i * c + j];
                       }
                       m1 *= inv_c;
                       m2 *= inv_c;
                       for (std::size_t j = 0; j < c; ++j) {
                         const double dxh = o.grad[i * c + j] * pg.value[j];
                         g[i * c + j] += inv_std[i] * (dxh - m1 - xhat[i * c + j] * m2);
                       }
                     }
                   }
                 });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ArgumentError("concat_rows: nothing to concatenate");
  const std::size_t c = dims2(parts.front()).c;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (dims2(p).c != c) throw DimensionError("concat_rows: column counts differ");
    total += dims2(p).r;
  }
  std::vector<double> out;
  out.reserve(total * c);
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    offsets.push_back(out.size());
    out.insert(out.end(), p.values().begin(), p.values().end());
  }
  return make_op_n({total, c}, std::move(out), parts, [offsets](Node& o) {
    for (std::size_t k = 0; k < o.parents.size(); ++k) {
      auto& p = *o.parents[k];
      if (!p.requires_grad) continue;
      auto& g = p.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[offsets[k] + i];
    }
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ArgumentError("concat_cols: nothing to concatenate");
  const std::size_t r = dims2(parts.front()).r;
  std::size_t total = 0;
  std::vector<std::size_t> widths;
  for (const auto& p : parts) {
    if (dims2(p).r != r) throw DimensionError("concat_cols: row counts differ");
    widths.push_back(dims2(p).c);
    total += widths.back();
  }
  std::vector<double> out(r * total);
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto pv = parts[k].values();
    for (std::size_t i = 0; i < r; ++i)
      std::copy_n(pv.data() + i * widths[k], widths[k], out.data() + i * total + off);
    off += widths[k];
  }
  return make_op_n({r, total}, std::move(out), parts, [r, total, widths](Node& o) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < o.parents.size(); ++k) {
      auto& p = *o.parents[k];
      if (p.requires_grad) {
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < widths[k]; ++j) g[i * widths[k] + j] += o.grad[i * total + off + j];
      }
      off += widths[k];
    }
  });
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count) {
  const auto [r, c] = dims2(x);
  if (count == 0 || begin + count > r) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") outside " + shape_str(x.shape()));
  }
  std::vector<double> out(x.values().begin() + static_cast<std::ptrdiff_t>(begin * c),
                          x.values().begin() + static_cast<std::ptrdiff_t>((begin + count) * c));
  return make_op({count, c}, std::move(out), {x}, [begin, c](Node& o) {
    auto& g = o.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < o.grad.size(); ++i) g[begin * c + i] += o.grad[i];
  });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count) {
  const auto [r, c] = dims2(x);
  if (count == 0 || begin + count > c) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") outside " + shape_str(x.shape()));
  }
  std::vector<double> out(r * count);
  const auto xv = x.values();
  for (std::size_t i = 0; i < r; ++i) std::copy_n(xv.data() + i * c + begin, count, out.data() + i * count);
  return make_op({r, count}, std::move(out), {x}, [r, c, begin, count](Node& o) {
    auto& g = o.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < count; ++j) g[i * c + begin + j] += o.grad[i * count + j];
  });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices) {
  const auto [r, c] = dims2(x);
  if (indices.empty()) throw ArgumentError("gather_rows: empty index list");
  std::vector<double> out(indices.size() * c);
  const auto xv = x.values();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= r) throw ArgumentError("gather_rows: index " + std::to_string(indices[i]) + " out of range");
    std::copy_n(xv.data() + indices[i] * c, c, out.data() + i * c);
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return make_op({indices.size(), c}, std::move(out), {x}, [c, idx = std::move(idx)](Node& o) {
    auto& g = o.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < c; ++j) g[idx[i] * c + j] += o.grad[i * c + j];
  });
}

Tensor repeat_rows(const Tensor& x, std::size_t times) {
  const auto [r, c] = dims2(x);
  if (times == 0) throw ArgumentError("repeat_rows: times must be positive");
  std::vector<double> out(r * times * c);
  const auto xv = x.values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t t = 0; t < times; ++t) std::copy_n(xv.data() + i * c, c, out.data() + (i * times + t) * c);
  return make_op({r * times, c}, std::move(out), {x}, [r, c, times](Node& o) {
    auto& g = o.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t t = 0; t < times; ++t)
        for (std::size_t j = 0; j < c; ++j) g[i * c + j] += o.grad[(i * times + t) * c + j];
  });
}

Tensor group_max(const Tensor& x, std::size_t group) {
  const auto [r, c] = dims2(x);
  if (group == 0 || r % group != 0) {
    throw DimensionError("group_max: " + std::to_string(r) + " rows not divisible into groups of " +
                         std::to_string(group));
  }
  const std::size_t blocks = r / group;
  std::vector<double> out(blocks * c);
  std::vector<std::size_t> arg(blocks * c);
  const auto xv = x.values();
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t j = 0; j < c; ++j) {
      std::size_t best = b * group;
      double v = xv[best * c + j];
      for (std::size_t t = 1; t < group; ++t) {
        const std::size_t row = b * group + t;
        if (xv[row * c + j] > v) {
          v = xv[row * c + j];
          best = row;
        }
      }
      out[b * c + j] = v;
      arg[b * c + j] = best;
    }
  }
  return make_op({blocks, c}, std::move(out), {x}, [c, arg = std::move(arg)](Node& o) {
    auto& g = o.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < arg.size(); ++i) g[arg[i] * c + i % c] += o.grad[i];
  });
}

Tensor max_rows(const Tensor& x) { return group_max(x, dims2(x).r); }

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw DimensionError("reshape: " + shape_str(x.shape()) + " to " + shape_str(shape));
  }
  std::vector<double> out(x.values().begin(), x.values().end());
  return make_op(std::move(shape), std::move(out), {x}, [](Node& o) {
    auto& g = o.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
  });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return make_op({1}, {s}, {x}, [](Node& o) {
    auto& g = o.parents[0]->ensure_grad();
    for (auto& v : g) v += o.grad[0];
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.size())); }

Tensor dropout(const Tensor& x, double p, std::uint64_t seed) {
  if (p < 0.0 || p >= 1.0) throw ArgumentError("dropout: p must be in [0, 1)");
  if (p == 0.0) return x;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(1.0 - p);
  const double s = 1.0 / (1.0 - p);
  std::vector<double> mask(x.size());
  for (auto& m : mask) m = keep(rng) ? s : 0.0;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.values()[i] * mask[i];
  return make_op(x.shape(), std::move(out), {x}, [mask = std::move(mask)](Node& o) {
    auto& g = o.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * mask[i];
  });
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
  const auto [r, c] = dims2(logits);
  if (labels.size() != r) throw DimensionError("cross_entropy: label count does not match batch");
  std::vector<double> probs(logits.size());
  double loss = 0.0;
  const auto xv = logits.values();
  for (std::size_t i = 0; i < r; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c) {
      throw ArgumentError("cross_entropy: label " + std::to_string(labels[i]) + " outside [0, " +
                          std::to_string(c) + ")");
    }
    const double* row = xv.data() + i * c;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j) mx = std::max(mx, row[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      probs[i * c + j] = std::exp(row[j] - mx);
      s += probs[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) probs[i * c + j] /= s;
    loss += mx + std::log(s) - row[labels[i]];
  }
  loss /= static_cast<double>(r);
  std::vector<int> lab(labels.begin(), labels.end());
  return make_op({1}, {loss}, {logits}, [r, c, probs = std::move(probs), lab = std::move(lab)](Node& o) {
    auto& g = o.parents[0]->ensure_grad();
    const double s = o.grad[0] / static_cast<double>(r);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += s * probs[i * c + j];
      g[i * c + static_cast<std::size_t>(lab[i])] -= s;
    }
  });
}

Tensor nll_loss(const Tensor& log_probs, std::span<const int> labels) {
  const auto [r, c] = dims2(log_probs);
  if (labels.size() != r) throw DimensionError("nll_loss: label count does not match rows");
  double loss = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c) {
      throw ArgumentError("nll_loss: label " + std::to_string(labels[i]) + " outside [0, " + std::to_string(c) +
                          ")");
    }
    loss -= log_probs.values()[i * c + static_cast<std::size_t>(labels[i])];
  }
  loss /= static_cast<double>(r);
  std::vector<int> lab(labels.begin(), labels.end());
  return make_op({1}, {loss}, {log_probs}, [r, c, lab = std::move(lab)](Node& o) {
    auto& g = o.parents[0]->ensure_grad();
    const double s = o.grad[0] / static_cast<double>(r);
    for (std::size_t i = 0; i < r; ++i) g[i * c + static_cast<std::size_t>(lab[i])] -= s;
  });
}

}  // namespace gft::numcore
