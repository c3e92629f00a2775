#include "gft/model/prompts.hpp"

#include "gft/errors.hpp"
#include "gft/numcore/ops.hpp"

namespace gft::model {

backbone::EmbeddingMatrix inject_prompts(const backbone::EmbeddingMatrix& e0, const PromptSet& prompts) {
  if (e0.layout.prompts_injected || e0.layout.prompts != 0) {
    throw ContractError("inject_prompts: prompts were already injected");
  }
  if (e0.layout.cls != 1 || e0.data.rows() != e0.layout.rows()) {
    throw ContractError("inject_prompts: embedding does not have the [cls | patches] layout");
  }
  backbone::EmbeddingMatrix out = e0;
  out.layout.prompts_injected = true;
  if (prompts.length == 0) return out;
  if (prompts.tokens.rows() != prompts.length || prompts.tokens.cols() != e0.dim()) {
    throw DimensionError("inject_prompts: prompt matrix is " + numcore::shape_str(prompts.tokens.shape()) +
                         ", expected " + std::to_string(prompts.length) + "x" + std::to_string(e0.dim()));
  }
  std::vector<numcore::Tensor> parts{numcore::slice_rows(e0.data, 0, 1), prompts.tokens};
  if (e0.layout.patches > 0) parts.push_back(numcore::slice_rows(e0.data, 1, e0.layout.patches));
  out.data = numcore::concat_rows(parts);
  out.layout.prompts = prompts.length;
  return out;
}

}  // namespace gft::model
