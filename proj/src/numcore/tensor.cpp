#include "gft/numcore/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "gft/errors.hpp"

namespace gft::numcore {

namespace {
thread_local Tape* g_active_tape = nullptr;
}

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::vector<double>& Node::ensure_grad() {
  if (grad.empty()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : node_(std::make_shared<Node>()) {
  if (shape.empty()) shape = {1};
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
  }
  if (numel(shape) != values.size()) {
    throw DimensionError("shape " + shape_str(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
  }
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return Tensor({1}, {value}, requires_grad); }

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows, bool requires_grad) {
  if (rows.empty() || rows.front().empty()) throw DimensionError("from_rows needs a non-empty matrix");
  const auto c = rows.front().size();
  std::vector<double> v;
  v.reserve(rows.size() * c);
  for (const auto& r : rows) {
    if (r.size() != c) throw DimensionError("ragged rows in from_rows");
    v.insert(v.end(), r.begin(), r.end());
  }
  return Tensor({rows.size(), c}, std::move(v), requires_grad);
}

std::size_t Tensor::rows() const { return node_->shape.front(); }

std::size_t Tensor::cols() const { return node_->shape.size() > 1 ? node_->value.size() / node_->shape.front() : 1; }

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
  return node_->value[0];
}

double Tensor::at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }

void Tensor::backward() const {
  Tape* tape = active_tape();
  if (tape == nullptr) throw ContractError("backward() called without an active tape");
  tape->backward(*this);
}

Tensor Tensor::detach() const { return Tensor(shape(), node_->value, false); }

void Tape::record(std::shared_ptr<Node> node) { nodes_.push_back(std::move(node)); }

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw ContractError("tape already replayed; run the forward pass again");
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " +
                        (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
  }
  const auto& root = loss.node();
  if (!root->requires_grad) throw ContractError("loss is not connected to any trainable leaf");
  if (!root->backward) {
    // The loss itself is a leaf.
    root->ensure_grad()[0] += 1.0;
    consumed_ = true;
    return;
  }
  if (std::find(nodes_.begin(), nodes_.end(), root) == nodes_.end()) {
    throw ContractError("loss was not recorded on this tape");
  }
  root->ensure_grad()[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node& n = **it;
    if (n.grad.empty() || !n.backward) continue;
    n.backward(n);
  }
  consumed_ = true;
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }

TapeScope::~TapeScope() { g_active_tape = previous_; }

Tape* active_tape() noexcept { return g_active_tape; }

}  // namespace gft::numcore
