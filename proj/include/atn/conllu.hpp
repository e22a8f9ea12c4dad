#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace atn {

struct DepNode {
  std::string token;
  int index = 0;  // 1-based sentence position
  int head = 0;   // 0 marks the root
  std::vector<int> children;  // sorted ascending
};

// Rooted dependency tree over all tokens of a sentence.
class DepTree {
 public:
  DepTree() = default;
  // Validates single root, connectivity and acyclicity. Heads index into
  // the 1-based token positions of `tokens`.
  DepTree(std::vector<std::string> tokens, std::vector<int> heads);

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  int root() const { return root_; }
  const DepNode& node(int index) const { return nodes_.at(static_cast<std::size_t>(index - 1)); }
  const std::vector<DepNode>& nodes() const { return nodes_; }
  std::vector<std::string> tokens() const;

  // Children before parents; siblings in index order.
  std::vector<int> post_order() const;
  std::vector<std::pair<int, int>> id_head_pairs() const;

 private:
  std::vector<DepNode> nodes_;
  int root_ = 0;
};

// One sentence block. Comment lines, multiword ranges ("2-3") and empty nodes
// ("2.1") are skipped; only ID, FORM and HEAD are read.
DepTree parse_conllu(std::string_view text);
// Blank-line separated blocks.
std::vector<DepTree> parse_conllu_corpus(std::string_view text);
// Ten-column block with unused columns set to "_", no trailing blank line.
std::string to_conllu(const DepTree& tree);

}  // namespace atn
