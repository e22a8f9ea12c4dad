#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "atn/autograd.hpp"
#include "atn/tensor.hpp"

namespace atn {

// Named, insertion-ordered collection of trainable tensors. Tensors live at
// stable addresses so tapes can alias them.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor t);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;

  std::size_t size() const { return order_.size(); }
  const std::vector<std::string>& names() const { return order_; }
  std::size_t scalar_count() const;

  void zero_grad();

  ParamStore clone() const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::unique_ptr<Tensor>> index_;
};

// Binds named parameters onto a tape: differentiably for a mutable store,
// as read-only aliases for a const one.
class ParamBinder {
 public:
  ParamBinder(Tape& tape, ParamStore& store) : tape_(tape), mutable_(&store), store_(store) {}
  ParamBinder(Tape& tape, const ParamStore& store) : tape_(tape), store_(store) {}

  Var operator()(const std::string& name) const;
  Tape& tape() const { return tape_; }
  const ParamStore& store() const { return store_; }

 private:
  Tape& tape_;
  ParamStore* mutable_ = nullptr;
  const ParamStore& store_;
};

// splitmix64-based generator. Bit-reproducible across platforms, unlike the
// standard distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }

 private:
  std::uint64_t state_;
};

}  // namespace atn
