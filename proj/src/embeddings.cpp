#include "atn/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "atn/error.hpp"
#include "atn/params.hpp"

namespace atn {

std::uint64_t token_hash(const std::string& token) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : token) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

EmbeddingTable::EmbeddingTable(std::size_t dim, std::uint64_t oov_seed)
    : dim_(dim), oov_seed_(oov_seed) {
  if (dim == 0) throw ConfigError("embedding dim must be positive");
}

void EmbeddingTable::add(const std::string& token, std::vector<double> vec) {
  if (vec.size() != dim_) {
    throw ShapeError("embedding for '" + token + "' has length " + std::to_string(vec.size()) +
                     ", table dim is " + std::to_string(dim_));
  }
  if (rows_.count(token)) return;
  rows_[token] = rows_.size();
  matrix_.insert(matrix_.end(), vec.begin(), vec.end());
}

EmbeddingTable EmbeddingTable::load(const std::string& path, std::size_t dim,
                                    const std::optional<std::set<std::string>>& vocab_filter,
                                    std::uint64_t oov_seed) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read embeddings file '" + path + "'");
  EmbeddingTable table(dim, oov_seed);
  std::string line;
  std::size_t usable = 0;
  std::vector<double> vec;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t sp = line.find(' ');
    if (sp == std::string::npos || sp == 0) {
      ++table.skipped_;
      continue;
    }
    std::string token = line.substr(0, sp);
    vec.clear();
    const char* p = line.c_str() + sp;
    bool ok = true;
    while (true) {
      while (*p == ' ') ++p;
      if (*p == '\0') break;
      char* end = nullptr;
      double v = std::strtod(p, &end);
      if (end == p || (*end != ' ' && *end != '\0')) {
        ok = false;
        break;
      }
      vec.push_back(v);
      p = end;
    }
    if (!ok || vec.size() != dim) {
      ++table.skipped_;
      continue;
    }
    ++usable;
    if (vocab_filter && !vocab_filter->count(token)) continue;
    table.add(token, vec);
  }
  if (usable == 0) throw ParseError("embeddings file '" + path + "' has no usable lines");
  return table;
}

std::optional<std::string> EmbeddingTable::resolve(const std::string& token) const {
  if (rows_.count(token)) return token;
  std::string lower = token;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (rows_.count(lower)) return lower;
  return std::nullopt;
}

std::vector<double> EmbeddingTable::lookup(const std::string& token) const {
  if (auto key = resolve(token)) {
    auto begin = matrix_.begin() + static_cast<std::ptrdiff_t>(rows_.at(*key) * dim_);
    return {begin, begin + static_cast<std::ptrdiff_t>(dim_)};
  }
  Rng rng(token_hash(token) ^ oov_seed_);
  std::vector<double> out(dim_);
  for (double& v : out) v = rng.uniform(-0.05, 0.05);
  return out;
}

}  // namespace atn
