#include "atn/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "atn/error.hpp"

namespace atn {

std::size_t dims_size(const Dims& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::string dims_str(const Dims& dims) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) os << 'x';
    os << dims[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Dims dims, bool requires_grad)
    : dims_(std::move(dims)), value_(dims_size(dims_), 0.0), requires_grad_(requires_grad) {
  if (dims_.size() > 2) throw ShapeError("tensor rank " + std::to_string(dims_.size()) + " > 2");
}

Tensor::Tensor(Dims dims, std::vector<double> data, bool requires_grad)
    : dims_(std::move(dims)), value_(std::move(data)), requires_grad_(requires_grad) {
  if (dims_.size() > 2) throw ShapeError("tensor rank " + std::to_string(dims_.size()) + " > 2");
  if (value_.size() != dims_size(dims_)) {
    throw ShapeError("length mismatch: shape " + dims_str(dims_) + " needs " +
                     std::to_string(dims_size(dims_)) + " values, got " +
                     std::to_string(value_.size()));
  }
}

Tensor Tensor::scalar(double v) { return Tensor(Dims{}, std::vector<double>{v}); }

Tensor Tensor::vector(std::vector<double> v) {
  Dims d{v.size()};
  return Tensor(std::move(d), std::move(v));
}

Tensor Tensor::zeros(Dims dims) { return Tensor(std::move(dims)); }

std::size_t Tensor::rows() const { return dims_.size() == 2 ? dims_[0] : 1; }

std::size_t Tensor::cols() const {
  if (dims_.size() == 2) return dims_[1];
  if (dims_.size() == 1) return dims_[0];
  return 1;
}

double Tensor::item() const {
  if (value_.size() != 1) throw ShapeError("item() on tensor of shape " + dims_str(dims_));
  return value_[0];
}

std::span<double> Tensor::grad() {
  if (grad_.size() != value_.size()) grad_.assign(value_.size(), 0.0);
  return grad_;
}

void Tensor::zero_grad() {
  if (!grad_.empty()) std::fill(grad_.begin(), grad_.end(), 0.0);
}

}  // namespace atn
