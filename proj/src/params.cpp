#include "atn/params.hpp"

#include "atn/error.hpp"

namespace atn {

Tensor& ParamStore::add(const std::string& name, Tensor t) {
  if (contains(name)) throw Error("duplicate parameter '" + name + "'");
  order_.push_back(name);
  auto& slot = index_[name];
  slot = std::make_unique<Tensor>(std::move(t));
  return *slot;
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter '" + name + "'");
  return *it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter '" + name + "'");
  return *it->second;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : index_) n += t->size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [_, t] : index_) t->zero_grad();
}

ParamStore ParamStore::clone() const {
  ParamStore out;
  for (const auto& name : order_) {
    Tensor copy = at(name);
    copy.drop_grad();
    out.add(name, std::move(copy));
  }
  return out;
}

Var ParamBinder::operator()(const std::string& name) const {
  if (mutable_) return tape_.bind(mutable_->at(name));
  return tape_.bind(store_.at(name));
}

std::uint64_t Rng::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

}  // namespace atn
