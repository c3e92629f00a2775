#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "gft/numcore/tensor.hpp"

namespace gft::numcore {

// A named weight. Frozen tensors still record gradients; the optimizer is
// what refuses to move them.
struct ParamTensor {
  std::string name;
  Tensor tensor;
  bool frozen = false;
};

// Ordered, name-unique collection of parameters. Handles returned by add()
// alias the stored tensor, so modules keep them as plain members.
class ParamStore {
 public:
  Tensor add(std::string name, Shape shape, bool frozen);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  ParamTensor& get(const std::string& name);
  const ParamTensor& get(const std::string& name) const;

  std::vector<ParamTensor>& params() { return params_; }
  const std::vector<ParamTensor>& params() const { return params_; }

  std::size_t total_count() const;
  std::size_t trainable_count() const;
  void zero_grad();
  void set_frozen(const std::string& name, bool frozen);

 private:
  std::vector<ParamTensor> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Fill helpers used by model constructors.
void fill_normal(Tensor& t, double stddev, std::mt19937_64& rng);
// U(-b, b) with b = sqrt(6 / (fan_in + fan_out)).
void fill_xavier_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);
void fill_constant(Tensor& t, double value);

}  // namespace gft::numcore
