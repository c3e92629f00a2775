#include "gft/numcore/params.hpp"

#include <cmath>

#include "gft/errors.hpp"

namespace gft::numcore {

Tensor ParamStore::add(std::string name, Shape shape, bool frozen) {
  if (contains(name)) throw ArgumentError("duplicate parameter name '" + name + "'");
  Tensor t = Tensor::zeros(std::move(shape), true);
  index_.emplace(name, params_.size());
  params_.push_back({std::move(name), t, frozen});
  return t;
}

ParamTensor& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ArgumentError("no parameter named '" + name + "'");
  return params_[it->second];
}

const ParamTensor& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ArgumentError("no parameter named '" + name + "'");
  return params_[it->second];
}

std::size_t ParamStore::total_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

std::size_t ParamStore::trainable_count() const {
  std::size_t n = 0;
  for (const auto& p : params_)
    if (!p.frozen) n += p.tensor.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

void ParamStore::set_frozen(const std::string& name, bool frozen) { get(name).frozen = frozen; }

void fill_normal(Tensor& t, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.mutable_values()) v = dist(rng);
}

void fill_xavier_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.mutable_values()) v = dist(rng);
}

void fill_constant(Tensor& t, double value) {
  for (auto& v : t.mutable_values()) v = value;
}

}  // namespace gft::numcore
