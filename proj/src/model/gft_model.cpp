#include "gft/model/gft_model.hpp"

#include "gft/errors.hpp"
#include "gft/numcore/ops.hpp"

namespace gft::model {

using numcore::Tensor;
namespace ops = numcore;

namespace {

// Independent stream per submodule so toggling one module never reshuffles
// the weights of another.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return std::mt19937_64(z ^ (z >> 31));
}

}  // namespace

GftModel::GftModel(GftModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const std::size_t d = cfg_.dim;

  tokenizer_ = std::make_unique<pointops::TokenizerWeights>(store_, "tokenizer", cfg_.tokenizer_hidden, d,
                                                            cfg_.unlock_tokenizer);
  cls_ = store_.add("cls_token", {1, d}, !cfg_.train_cls);
  if (cfg_.prompt_length > 0) {
    prompts_.length = cfg_.prompt_length;
    prompts_.tokens = store_.add("prompts", {cfg_.prompt_length, d}, false);
  }
  for (std::size_t i = 0; i < cfg_.depth; ++i) {
    layers_.emplace_back(store_, "encoder.layers." + std::to_string(i), d, cfg_.heads, cfg_.mlp_hidden, true);
  }
  norm_gain_ = store_.add("encoder.norm.gain", {d}, true);
  norm_bias_ = store_.add("encoder.norm.bias", {d}, true);
  if (cfg_.use_edgeconv) edgeconv_ = std::make_unique<EdgeConvPyramid>(store_, "edgeconv", d, cfg_.edgeconv);
  for (int i : cfg_.interaction_layers) {
    interactions_.try_emplace(i, store_, "interactions." + std::to_string(i), d, cfg_.edgeconv.out_dim,
                              cfg_.xattn_dim, cfg_.xattn_heads);
  }
  if (cfg_.task == Task::classification) {
    classifier_ = std::make_unique<heads::ClassifierHead>(store_, "head", 3 * d, cfg_.head_hidden, cfg_.num_classes,
                                                          cfg_.head_dropout);
  } else {
    heads::SegDecoderConfig sc;
    sc.embed_dim = d;
    sc.dec_dim = cfg_.seg.dec_dim;
    sc.dec_blocks = cfg_.seg.dec_blocks;
    sc.dec_heads = cfg_.seg.dec_heads;
    sc.dec_mlp_hidden = cfg_.seg.dec_mlp_hidden;
    sc.point_hidden = cfg_.seg.point_hidden;
    sc.num_parts = cfg_.seg.num_parts;
    sc.taps = cfg_.seg.taps;
    sc.interp_neighbors = cfg_.seg.interp_neighbors;
    segmenter_ = std::make_unique<heads::SegDecoder>(store_, "seg_head", sc);
  }

  auto rng = stream(seed, 0);
  tokenizer_->init(rng);
  rng = stream(seed, 1);
  numcore::fill_normal(cls_, 0.02, rng);
  if (prompts_.length > 0) {
    rng = stream(seed, 2);
    numcore::fill_normal(prompts_.tokens, 0.02, rng);
  }
  rng = stream(seed, 3);
  for (auto& layer : layers_) layer.init(rng, cfg_.backbone_init_std);
  numcore::fill_constant(norm_gain_, 1.0);
  numcore::fill_constant(norm_bias_, 0.0);
  if (edgeconv_) {
    rng = stream(seed, 4);
    edgeconv_->init(rng);
  }
  rng = stream(seed, 5);
  for (auto& [i, blk] : interactions_) blk.init(rng);
  rng = stream(seed, 6);
  if (classifier_) classifier_->init(rng);
  if (segmenter_) segmenter_->init(rng);
}

ForwardResult GftModel::forward(const pointops::PointCloud& cloud, const ForwardOptions& options) const {
  ForwardResult r;
  backbone::EmbeddingMatrix e0 =
      pointops::tokenize(cloud, cfg_.num_groups, cfg_.group_size, *tokenizer_, cls_, &r.geometry);
  backbone::EmbeddingMatrix e = inject_prompts(e0, prompts_);
  r.layout = e.layout;

  backbone::EncodeRequest request;
  request.taps = options.taps;
  request.attention_layers = options.attention_layers;
  if (segmenter_) request.taps.insert(cfg_.seg.taps.begin(), cfg_.seg.taps.end());

  if (edgeconv_) {
    const std::size_t tokens = e.layout.prompts + e.layout.patches;
    r.pyramid = edgeconv_->forward(ops::slice_rows(e.data, 1, tokens));
    if (options.interactions) {
      const Tensor m = r.pyramid->fused;
      for (const auto& [i, blk] : interactions_) {
        const InteractionBlock* b = &blk;
        request.before_layer[i] = [b, m](const Tensor& x) { return b->forward(x, m); };
      }
    }
  }

  backbone::EncodeResult enc = backbone::encode(e.data, layers_, request);
  r.final = enc.final;
  r.attention = std::move(enc.attention);
  r.taps = std::move(enc.taps);

  if (classifier_) {
    Tensor normed = ops::layer_norm(r.final, norm_gain_, norm_bias_);
    heads::PoolingSlots slots{cfg_.pooling.cls, cfg_.pooling.patches, cfg_.pooling.prompts};
    r.pooled = heads::pool_tokens(normed, r.layout, slots);
    r.logits = classifier_->forward(r.pooled, options.training, options.dropout_seed);
  } else {
    std::map<int, Tensor> normed;
    for (int t : cfg_.seg.taps) normed[t] = ops::layer_norm(r.taps.at(t), norm_gain_, norm_bias_);
    r.logits = segmenter_->forward(normed, r.layout, r.geometry, cloud);
  }
  return r;
}

Tensor GftModel::loss(const ForwardResult& result, const pointops::PointCloud& cloud) const {
  if (cfg_.task == Task::classification) {
    if (!cloud.object_label) throw ArgumentError("classification loss needs an object label");
    const int label = *cloud.object_label;
    return ops::cross_entropy(result.logits, std::span<const int>(&label, 1));
  }
  if (cloud.point_labels.size() != cloud.size()) throw ArgumentError("segmentation loss needs per-point labels");
  return ops::nll_loss(ops::log_softmax(result.logits), cloud.point_labels);
}

std::vector<int> GftModel::predict(const ForwardResult& result) const {
  const std::size_t c = result.logits.cols();
  std::vector<int> out;
  for (std::size_t i = 0; i < result.logits.rows(); ++i) {
    out.push_back(heads::argmax(result.logits.values().subspan(i * c, c)));
  }
  return out;
}

}  // namespace gft::model
