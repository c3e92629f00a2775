#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "gft/backbone/encoder.hpp"
#include "gft/heads/classifier.hpp"
#include "gft/heads/segmentation.hpp"
#include "gft/model/config.hpp"
#include "gft/model/edgeconv.hpp"
#include "gft/model/interaction.hpp"
#include "gft/model/prompts.hpp"
#include "gft/numcore/params.hpp"
#include "gft/pointops/tokenizer.hpp"

namespace gft::model {

struct ForwardOptions {
  bool training = false;          // enables head dropout
  std::uint64_t dropout_seed = 0;
  bool interactions = true;       // false skips every interaction hook
  std::set<int> taps;             // extra encoder outputs to return
  std::set<int> attention_layers; // encoder layers whose attention to return
};

struct ForwardResult {
  numcore::Tensor final;  // E_F, (1+s+L) x D, before the final norm
  backbone::TokenLayout layout;
  pointops::TokenizedCloud geometry;
  std::optional<PyramidFeatures> pyramid;
  std::map<int, numcore::Tensor> taps;
  std::map<int, std::vector<numcore::Tensor>> attention;
  numcore::Tensor pooled;  // classification: 1 x 3D
  numcore::Tensor logits;  // classification: 1 x C, segmentation: N x C
};

// Frozen backbone + GFT modules + task head in one ParamStore. Parameter
// names are dotted paths; the frozen flag of every tensor follows the config.
class GftModel {
 public:
  GftModel(GftModelConfig cfg, std::uint64_t seed);
  GftModel(const GftModel&) = delete;
  GftModel& operator=(const GftModel&) = delete;

  ForwardResult forward(const pointops::PointCloud& cloud, const ForwardOptions& options = {}) const;

  // Classification: cross-entropy against object_label.
  // Segmentation: NLL of log-softmax logits against point_labels.
  numcore::Tensor loss(const ForwardResult& result, const pointops::PointCloud& cloud) const;

  // Argmax class (classification) or per-point argmax (segmentation).
  std::vector<int> predict(const ForwardResult& result) const;

  const GftModelConfig& config() const noexcept { return cfg_; }
  numcore::ParamStore& params() noexcept { return store_; }
  const numcore::ParamStore& params() const noexcept { return store_; }

  const std::vector<backbone::EncoderLayerWeights>& encoder_layers() const noexcept { return layers_; }
  const pointops::TokenizerWeights& tokenizer() const noexcept { return *tokenizer_; }
  const numcore::Tensor& cls_token() const noexcept { return cls_; }
  const PromptSet& prompts() const noexcept { return prompts_; }
  const EdgeConvPyramid* edgeconv() const noexcept { return edgeconv_.get(); }
  const std::map<int, InteractionBlock>& interactions() const noexcept { return interactions_; }

 private:
  GftModelConfig cfg_;
  numcore::ParamStore store_;
  std::unique_ptr<pointops::TokenizerWeights> tokenizer_;
  numcore::Tensor cls_;
  PromptSet prompts_;
  std::vector<backbone::EncoderLayerWeights> layers_;
  numcore::Tensor norm_gain_, norm_bias_;
  std::unique_ptr<EdgeConvPyramid> edgeconv_;
  std::map<int, InteractionBlock> interactions_;
  std::unique_ptr<heads::ClassifierHead> classifier_;
  std::unique_ptr<heads::SegDecoder> segmenter_;
};

}  // namespace gft::model
