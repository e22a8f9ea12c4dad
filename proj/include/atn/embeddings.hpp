#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace atn {

// Token vectors in GloVe text format. Frozen: lookups never mutate the table.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 300, std::uint64_t oov_seed = 0);

  // Lines "token v1 ... vdim". Lines of the wrong arity are skipped and counted.
  static EmbeddingTable load(const std::string& path, std::size_t dim,
                             const std::optional<std::set<std::string>>& vocab_filter = std::nullopt,
                             std::uint64_t oov_seed = 0);

  void add(const std::string& token, std::vector<double> vec);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  std::size_t skipped_lines() const { return skipped_; }
  std::uint64_t oov_seed() const { return oov_seed_; }
  bool contains(const std::string& token) const { return rows_.count(token) != 0; }

  // Exact match, then lowercase match, then a deterministic pseudo-random
  // vector in [-0.05, 0.05] seeded by the token hash and the OOV seed.
  std::vector<double> lookup(const std::string& token) const;
  // The stored key lookup() resolves to, or nullopt for OOV.
  std::optional<std::string> resolve(const std::string& token) const;

 private:
  std::size_t dim_;
  std::uint64_t oov_seed_;
  std::size_t skipped_ = 0;
  std::unordered_map<std::string, std::size_t> rows_;
  std::vector<double> matrix_;
};

// FNV-1a, stable across platforms.
std::uint64_t token_hash(const std::string& token);

}  // namespace atn
