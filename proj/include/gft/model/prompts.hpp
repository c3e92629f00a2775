#pragma once

#include "gft/backbone/embedding.hpp"
#include "gft/numcore/params.hpp"

namespace gft::model {

struct PromptSet {
  numcore::Tensor tokens;  // s x D; undefined when s == 0
  std::size_t length = 0;
};

// [cls; patches] -> [cls; prompts; patches]. With s == 0 the data is
// returned unchanged (only the layout is marked). A second injection throws
// ContractError.
backbone::EmbeddingMatrix inject_prompts(const backbone::EmbeddingMatrix& e0, const PromptSet& prompts);

}  // namespace gft::model
