#pragma once

#include <cstddef>

#include "gft/numcore/tensor.hpp"

namespace gft::backbone {

// Row layout of the token sequence: [CLS | prompts | patches].
struct TokenLayout {
  std::size_t cls = 1;
  std::size_t prompts = 0;
  std::size_t patches = 0;
  bool prompts_injected = false;

  std::size_t rows() const noexcept { return cls + prompts + patches; }
  std::size_t prompt_begin() const noexcept { return cls; }
  std::size_t patch_begin() const noexcept { return cls + prompts; }
};

struct EmbeddingMatrix {
  numcore::Tensor data;  // rows() x D
  TokenLayout layout;

  std::size_t dim() const { return data.cols(); }
};

}  // namespace gft::backbone
