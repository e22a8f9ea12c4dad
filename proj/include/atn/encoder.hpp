#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atn/autograd.hpp"
#include "atn/config.hpp"
#include "atn/conllu.hpp"
#include "atn/embeddings.hpp"
#include "atn/params.hpp"

namespace atn {

// One LSTM gate: W (d x e) on the input, U (d x d) on the recurrent state.
struct GateParams {
  Var W;
  Var U;
  Var b;
};

// Tree-LSTM cell weights for the gates i, o, u, f.
struct CellParams {
  GateParams i, o, u, f;

  static void init(ParamStore& store, const std::string& prefix, std::size_t emb_dim,
                   std::size_t hidden_dim, Rng& rng);
  static CellParams bind(const ParamBinder& bind, const std::string& prefix);
};

// Sequential LSTM over token order; same gate layout as the tree cell.
using SeqParams = CellParams;

struct AttnParams {
  Var W_m;  // d_m x d
  Var U_m;  // d_m x d
  Var w;    // d_m
  Var W_a;  // d x d
  Var b_a;  // d

  static void init(ParamStore& store, const std::string& prefix, std::size_t hidden_dim,
                   std::size_t attn_dim, Rng& rng);
  static AttnParams bind(const ParamBinder& bind, const std::string& prefix);
};

struct NodeState {
  Var h;
  Var c;
};

struct AttentionResult {
  Var alpha;    // probability vector over children
  Var h_tilde;  // transformed attention summary, replaces the child sum
};

NodeState child_sum_cell(Var x, std::span<const NodeState> children, const CellParams& p);

// Left-to-right LSTM from a zero state; returns every step state.
std::vector<NodeState> run_lstm(std::span<const Var> inputs, const SeqParams& p);
Var sequence_context(std::span<const Var> inputs, const SeqParams& p,
                     ContextPooling pooling = ContextPooling::Final);

AttentionResult soft_attention(std::span<const Var> children_h, Var s, const AttnParams& p);

// Child-sum cell whose h-tilde comes from soft attention over the children.
// Forget gates still see the raw child states.
NodeState attentive_cell(Var x, std::span<const NodeState> children, Var s, const CellParams& cell,
                         const AttnParams& attn, AttentionResult* attention = nullptr);

struct EncoderParams {
  EncoderMode mode = EncoderMode::AttentiveTree;
  ContextPooling pooling = ContextPooling::Final;
  CellParams cell;
  AttnParams attn;
  SeqParams seq;
};

struct Encoding {
  Var H;  // n x d, row k holds token k+1
  NodeState root;
  Var context;  // s; only set in attentive-tree mode
  // Attention weights per token (index k-1), present for nodes with children.
  std::vector<std::optional<Var>> alphas;
};

// `inputs` holds one embedding Var per token in index order.
Encoding encode_tree(const DepTree& tree, std::span<const Var> inputs, const EncoderParams& p);
Encoding encode_tree(Tape& tape, const DepTree& tree, const EmbeddingTable& emb,
                     const EncoderParams& p);

// Registers the encoder weights a mode needs.
void init_encoder(ParamStore& store, const ModelConfig& cfg, Rng& rng);
EncoderParams bind_encoder(const ParamBinder& bind, const ModelConfig& cfg);

}  // namespace atn
