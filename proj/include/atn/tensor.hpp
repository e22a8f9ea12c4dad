#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace atn {

using Dims = std::vector<std::size_t>;

std::size_t dims_size(const Dims& dims);
std::string dims_str(const Dims& dims);

// Dense row-major array of doubles, rank 0 to 2. The gradient buffer is
// allocated on first use and always mirrors the value shape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Dims dims, bool requires_grad = false);
  Tensor(Dims dims, std::vector<double> data, bool requires_grad = false);

  static Tensor scalar(double v);
  static Tensor vector(std::vector<double> v);
  static Tensor zeros(Dims dims);

  const Dims& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return value_.size(); }
  // Rank 0 and 1 tensors report one row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> value() { return value_; }
  std::span<const double> value() const { return value_; }
  double& operator[](std::size_t i) { return value_[i]; }
  double operator[](std::size_t i) const { return value_[i]; }
  double at(std::size_t r, std::size_t c) const { return value_[r * cols() + c]; }
  double item() const;

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool on) { requires_grad_ = on; }

  bool has_grad() const { return !grad_.empty() || value_.empty(); }
  std::span<double> grad();  // allocates zeros on first call
  std::span<const double> grad() const { return grad_; }
  void zero_grad();
  void drop_grad() { grad_.clear(); }

  const std::vector<double>& data() const { return value_; }
  std::vector<double>& data() { return value_; }

 private:
  Dims dims_;
  std::vector<double> value_;
  std::vector<double> grad_;
  bool requires_grad_ = false;
};

}  // namespace atn
