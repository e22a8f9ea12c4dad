#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "atn/autograd.hpp"
#include "atn/conllu.hpp"
#include "atn/params.hpp"

namespace atn::testing {

inline Tensor random_tensor(Dims dims, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(dims));
  for (double& v : t.value()) v = rng.uniform(lo, hi);
  return t;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

// Random recursive tree with n nodes laid over a shuffled position order, so
// heads point both left and right. Tokens are drawn from `vocab`.
inline DepTree random_tree(Rng& rng, std::size_t n, const std::vector<std::string>& vocab) {
  std::vector<int> order(n), heads(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i + 1);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  heads[order[0] - 1] = 0;
  for (std::size_t k = 1; k < n; ++k) heads[order[k] - 1] = order[rng.below(k)];
  std::vector<std::string> toks(n);
  for (auto& t : toks) t = vocab[rng.below(vocab.size())];
  return DepTree(toks, heads);
}

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("atn-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(file(name), std::ios::binary) << text;
    return file(name);
  }

 private:
  std::filesystem::path path_;
};

}  // namespace atn::testing
