#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "gft/harness/synth.hpp"
#include "gft/numcore/params.hpp"

namespace gft::harness {

struct TrainConfig {
  double learning_rate = 5e-4;
  double warmup_lr = 1e-6;
  double min_lr = 1e-6;
  int warmup_epochs = 10;
  int epochs = 300;
  double weight_decay = 5e-2;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  AugmentOptions augment;

  // Throws ArgumentError unless warmup_epochs < epochs and all rates > 0.
  void validate() const;
};

// Linear warmup_lr -> learning_rate over [0, warmup_epochs], then cosine
// learning_rate -> min_lr over [warmup_epochs, epochs]. Defined on
// [0, epochs]; epoch == epochs is the end of the curve and returns min_lr.
double cosine_schedule(double epoch, const TrainConfig& cfg);

// AdamW with decoupled weight decay:
//   p <- p - lr*wd*p - lr * m_hat / (sqrt(v_hat) + eps)
// Frozen parameters and parameters without a gradient are skipped.
class AdamW {
 public:
  AdamW(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8, double weight_decay = 0.0);

  void step(numcore::ParamStore& store, double lr);
  std::uint64_t steps() const noexcept { return t_; }

 private:
  struct Moments {
    std::vector<double> m, v;
  };
  double beta1_, beta2_, eps_, wd_;
  std::uint64_t t_ = 0;
  std::unordered_map<std::string, Moments> state_;
};

}  // namespace gft::harness
