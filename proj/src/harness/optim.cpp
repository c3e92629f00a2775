#include "gft/harness/optim.hpp"

#include <cmath>
#include <numbers>

#include "gft/errors.hpp"

namespace gft::harness {

void TrainConfig::validate() const {
  if (epochs <= 0 || warmup_epochs < 0 || warmup_epochs >= epochs) {
    throw ArgumentError("train config: need 0 <= warmup_epochs < epochs");
  }
  if (!(learning_rate > 0 && warmup_lr > 0 && min_lr > 0)) throw ArgumentError("train config: rates must be > 0");
  if (weight_decay < 0) throw ArgumentError("train config: weight decay must be >= 0");
  if (batch_size == 0) throw ArgumentError("train config: batch size must be positive");
}

double cosine_schedule(double epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch > cfg.epochs) throw ArgumentError("cosine_schedule: epoch outside [0, epochs]");
  if (epoch < cfg.warmup_epochs) {
    return cfg.warmup_lr + (cfg.learning_rate - cfg.warmup_lr) * epoch / cfg.warmup_epochs;
  }
  const double span = cfg.epochs - cfg.warmup_epochs;
  const double progress = (epoch - cfg.warmup_epochs) / span;
  return cfg.min_lr + 0.5 * (cfg.learning_rate - cfg.min_lr) * (1.0 + std::cos(std::numbers::pi * progress));
}

AdamW::AdamW(double beta1, double beta2, double eps, double weight_decay)
    : beta1_(beta1), beta2_(beta2), eps_(eps), wd_(weight_decay) {}

void AdamW::step(numcore::ParamStore& store, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto& p : store.params()) {
    if (p.frozen) continue;
    auto values = p.tensor.mutable_values();
    auto& st = state_[p.name];
    if (st.m.empty()) {
      st.m.assign(values.size(), 0.0);
      st.v.assign(values.size(), 0.0);
    }
    const bool has_grad = p.tensor.has_grad();
    const auto grad = p.tensor.grad();
    if (has_grad && grad.size() != values.size()) {
      throw DimensionError("adamw: gradient of '" + p.name + "' has the wrong size");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = has_grad ? grad[i] : 0.0;
      st.m[i] = beta1_ * st.m[i] + (1.0 - beta1_) * g;
      st.v[i] = beta2_ * st.v[i] + (1.0 - beta2_) * g * g;
      const double m_hat = st.m[i] / bc1;
      const double v_hat = st.v[i] / bc2;
      values[i] = values[i] - lr * wd_ * values[i] - lr * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }
}

}  // namespace gft::harness
