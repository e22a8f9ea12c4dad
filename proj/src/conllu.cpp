#include "atn/conllu.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "atn/error.hpp"

namespace atn {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace

DepTree::DepTree(std::vector<std::string> tokens, std::vector<int> heads) {
  if (tokens.size() != heads.size()) throw ParseError("tree: tokens/heads length mismatch");
  if (tokens.empty()) throw ParseError("tree: empty sentence");
  const int n = static_cast<int>(tokens.size());
  nodes_.resize(tokens.size());
  for (int i = 0; i < n; ++i) {
    nodes_[i].token = std::move(tokens[i]);
    nodes_[i].index = i + 1;
    nodes_[i].head = heads[i];
    if (heads[i] < 0 || heads[i] > n) {
      throw ParseError("tree: head " + std::to_string(heads[i]) + " of token " +
                       std::to_string(i + 1) + " out of range");
    }
    if (heads[i] == i + 1) throw ParseError("tree: cyclic heads (token " + std::to_string(i + 1) + " heads itself)");
  }
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    if (heads[i] == 0) {
      ++roots;
      root_ = i + 1;
    } else {
      nodes_[heads[i] - 1].children.push_back(i + 1);
    }
  }
  if (roots == 0) throw ParseError("tree: no root");
  if (roots > 1) throw ParseError("tree: multiple roots");
  // Every node must reach the root within n steps.
  for (int i = 1; i <= n; ++i) {
    int cur = i;
    int steps = 0;
    while (cur != 0) {
      cur = nodes_[cur - 1].head;
      if (++steps > n) throw ParseError("tree: cyclic heads through token " + std::to_string(i));
    }
  }
}

std::vector<std::string> DepTree::tokens() const {
  std::vector<std::string> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.token);
  return out;
}

std::vector<int> DepTree::post_order() const {
  std::vector<int> order;
  order.reserve(nodes_.size());
  // Iterative DFS: (node, next child position).
  std::vector<std::pair<int, std::size_t>> stack{{root_, 0}};
  while (!stack.empty()) {
    auto& [id, pos] = stack.back();
    const auto& kids = node(id).children;
    if (pos < kids.size()) {
      int child = kids[pos++];
      stack.emplace_back(child, 0);
    } else {
      order.push_back(id);
      stack.pop_back();
    }
  }
  return order;
}

std::vector<std::pair<int, int>> DepTree::id_head_pairs() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& n : nodes_) out.emplace_back(n.index, n.head);
  return out;
}

DepTree parse_conllu(std::string_view text) {
  std::vector<std::string> tokens;
  std::vector<int> heads;
  int lineno = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++lineno;
    std::string_view line = trim_cr(raw);
    if (blank(line) || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 10) {
      throw ParseError("conllu line " + std::to_string(lineno) + ": expected 10 columns, got " +
                       std::to_string(cols.size()));
    }
    std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) continue;
    int idx = 0;
    int head = 0;
    if (!parse_int(id, idx)) {
      throw ParseError("conllu line " + std::to_string(lineno) + ": non-integer ID '" +
                       std::string(id) + "'");
    }
    if (!parse_int(cols[6], head)) {
      throw ParseError("conllu line " + std::to_string(lineno) + ": non-integer HEAD '" +
                       std::string(cols[6]) + "'");
    }
    if (idx != static_cast<int>(tokens.size()) + 1) {
      throw ParseError("conllu line " + std::to_string(lineno) + ": expected ID " +
                       std::to_string(tokens.size() + 1) + ", got " + std::to_string(idx));
    }
    tokens.emplace_back(cols[1]);
    heads.push_back(head);
  }
  if (tokens.empty()) throw ParseError("conllu: block has no token lines");
  return DepTree(std::move(tokens), std::move(heads));
}

std::vector<DepTree> parse_conllu_corpus(std::string_view text) {
  std::vector<DepTree> out;
  std::string block;
  auto flush = [&] {
    if (!block.empty()) out.push_back(parse_conllu(block));
    block.clear();
  };
  for (std::string_view line : split(text, '\n')) {
    if (blank(line)) {
      flush();
    } else {
      block.append(line);
      block.push_back('\n');
    }
  }
  flush();
  return out;
}

std::string to_conllu(const DepTree& tree) {
  std::ostringstream os;
  for (const auto& n : tree.nodes()) {
    os << n.index << '\t' << n.token << "\t_\t_\t_\t_\t" << n.head << "\t_\t_\t_\n";
  }
  return os.str();
}

}  // namespace atn
