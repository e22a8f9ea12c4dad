#include "atn/encoder.hpp"

#include <cmath>

#include "atn/error.hpp"

namespace atn {

namespace {

Tensor uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Tensor t(Dims{rows, cols}, true);
  for (double& v : t.value()) v = rng.uniform(-bound, bound);
  return t;
}

Tensor uniform_vector(std::size_t n, double bound, Rng& rng) {
  Tensor t(Dims{n}, true);
  for (double& v : t.value()) v = rng.uniform(-bound, bound);
  return t;
}

Tensor filled_vector(std::size_t n, double value) {
  Tensor t(Dims{n}, true);
  for (double& v : t.value()) v = value;
  return t;
}

// W x + U h + b, with the recurrent term dropped when h is absent.
Var gate_preact(const GateParams& g, Var x, const Var* h) {
  Var acc = add(matmul(g.W, x), g.b);
  if (h) acc = add(acc, matmul(g.U, *h));
  return acc;
}

void check_width(Var v, std::size_t d, const char* what) {
  if (v.value().rank() != 1 || v.size() != d) {
    throw ShapeError(std::string(what) + " has shape " + dims_str(v.dims()) + ", expected [" +
                     std::to_string(d) + "]");
  }
}

std::size_t hidden_width(const CellParams& p) { return p.i.b.size(); }

// Shared body of the plain and attentive cells once h-tilde is known.
NodeState cell_from_summary(Var x, std::span<const NodeState> children, const Var* h_tilde,
                            const CellParams& p) {
  Var i = sigmoid(gate_preact(p.i, x, h_tilde));
  Var o = sigmoid(gate_preact(p.o, x, h_tilde));
  Var u = tanh(gate_preact(p.u, x, h_tilde));
  Var c = hadamard(i, u);
  if (!children.empty()) {
    Var fx = add(matmul(p.f.W, x), p.f.b);
    std::vector<Var> terms{c};
    for (const NodeState& child : children) {
      Var f_k = sigmoid(add(fx, matmul(p.f.U, child.h)));
      terms.push_back(hadamard(f_k, child.c));
    }
    c = add_n(terms);
  }
  Var h = hadamard(o, tanh(c));
  return {h, c};
}

}  // namespace

void CellParams::init(ParamStore& store, const std::string& prefix, std::size_t emb_dim,
                      std::size_t hidden_dim, Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (const char* g : {"i", "o", "u", "f"}) {
    std::string s(g);
    store.add(prefix + ".W_" + s, uniform_matrix(hidden_dim, emb_dim, bound, rng));
    store.add(prefix + ".U_" + s, uniform_matrix(hidden_dim, hidden_dim, bound, rng));
    store.add(prefix + ".b_" + s, filled_vector(hidden_dim, s == "f" ? 1.0 : 0.0));
  }
}

CellParams CellParams::bind(const ParamBinder& bind, const std::string& prefix) {
  auto gate = [&](const char* g) {
    std::string s(g);
    return GateParams{bind(prefix + ".W_" + s), bind(prefix + ".U_" + s), bind(prefix + ".b_" + s)};
  };
  CellParams p;
  p.i = gate("i");
  p.o = gate("o");
  p.u = gate("u");
  p.f = gate("f");
  return p;
}

void AttnParams::init(ParamStore& store, const std::string& prefix, std::size_t hidden_dim,
                      std::size_t attn_dim, Rng& rng) {
  double bd = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  double bm = 1.0 / std::sqrt(static_cast<double>(attn_dim));
  store.add(prefix + ".W_m", uniform_matrix(attn_dim, hidden_dim, bd, rng));
  store.add(prefix + ".U_m", uniform_matrix(attn_dim, hidden_dim, bd, rng));
  store.add(prefix + ".w", uniform_vector(attn_dim, bm, rng));
  store.add(prefix + ".W_a", uniform_matrix(hidden_dim, hidden_dim, bd, rng));
  store.add(prefix + ".b_a", filled_vector(hidden_dim, 0.0));
}

AttnParams AttnParams::bind(const ParamBinder& bind, const std::string& prefix) {
  return AttnParams{bind(prefix + ".W_m"), bind(prefix + ".U_m"), bind(prefix + ".w"),
                    bind(prefix + ".W_a"), bind(prefix + ".b_a")};
}

NodeState child_sum_cell(Var x, std::span<const NodeState> children, const CellParams& p) {
  std::size_t d = hidden_width(p);
  if (children.empty()) return cell_from_summary(x, children, nullptr, p);
  std::vector<Var> hs;
  hs.reserve(children.size());
  for (const NodeState& child : children) {
    check_width(child.h, d, "child hidden state");
    check_width(child.c, d, "child memory cell");
    hs.push_back(child.h);
  }
  Var h_tilde = add_n(hs);
  return cell_from_summary(x, children, &h_tilde, p);
}

std::vector<NodeState> run_lstm(std::span<const Var> inputs, const SeqParams& p) {
  if (inputs.empty()) throw ShapeError("sequential LSTM: empty input sequence");
  std::vector<NodeState> states;
  states.reserve(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const Var* h_prev = t ? &states.back().h : nullptr;
    Var x = inputs[t];
    Var i = sigmoid(gate_preact(p.i, x, h_prev));
    Var o = sigmoid(gate_preact(p.o, x, h_prev));
    Var u = tanh(gate_preact(p.u, x, h_prev));
    Var c = hadamard(i, u);
    if (t) {
      Var f = sigmoid(gate_preact(p.f, x, h_prev));
      c = add(c, hadamard(f, states.back().c));
    }
    states.push_back({hadamard(o, tanh(c)), c});
  }
  return states;
}

Var sequence_context(std::span<const Var> inputs, const SeqParams& p, ContextPooling pooling) {
  auto states = run_lstm(inputs, p);
  if (pooling == ContextPooling::Final) return states.back().h;
  std::vector<Var> hs;
  for (const auto& s : states) hs.push_back(s.h);
  return scale(add_n(hs), 1.0 / static_cast<double>(hs.size()));
}

AttentionResult soft_attention(std::span<const Var> children_h, Var s, const AttnParams& p) {
  if (children_h.empty()) throw ShapeError("soft_attention: empty child list");
  std::size_t d = p.b_a.size();
  check_width(s, d, "context vector");
  Var us = matmul(p.U_m, s);
  std::vector<Var> logits;
  logits.reserve(children_h.size());
  for (Var h : children_h) {
    check_width(h, d, "child hidden state");
    Var m = tanh(add(matmul(p.W_m, h), us));
    logits.push_back(sum_all(hadamard(p.w, m)));
  }
  Var alpha = softmax_rows(concat_vec(logits));
  // g = alpha^T [h_1; ...; h_n]
  Var Hc = concat_rows(children_h);
  Var g = reshape(matmul(reshape(alpha, Dims{1, children_h.size()}), Hc), Dims{d});
  Var h_tilde = tanh(add(matmul(p.W_a, g), p.b_a));
  return {alpha, h_tilde};
}

NodeState attentive_cell(Var x, std::span<const NodeState> children, Var s, const CellParams& cell,
                         const AttnParams& attn, AttentionResult* attention) {
  if (children.empty()) return cell_from_summary(x, children, nullptr, cell);
  std::size_t d = hidden_width(cell);
  std::vector<Var> hs;
  for (const NodeState& child : children) {
    check_width(child.h, d, "child hidden state");
    check_width(child.c, d, "child memory cell");
    hs.push_back(child.h);
  }
  AttentionResult att = soft_attention(hs, s, attn);
  if (attention) *attention = att;
  return cell_from_summary(x, children, &att.h_tilde, cell);
}

Encoding encode_tree(const DepTree& tree, std::span<const Var> inputs, const EncoderParams& p) {
  if (tree.empty()) throw ShapeError("encode_tree: empty tree");
  if (inputs.size() != tree.size()) {
    throw ShapeError("encode_tree: " + std::to_string(inputs.size()) + " inputs for " +
                     std::to_string(tree.size()) + " tokens");
  }
  Encoding enc;
  enc.alphas.resize(tree.size());
  std::vector<Var> rows(tree.size());

  if (p.mode == EncoderMode::Sequential) {
    auto states = run_lstm(inputs, p.seq);
    for (std::size_t k = 0; k < states.size(); ++k) rows[k] = states[k].h;
    enc.root = states.back();
    enc.H = concat_rows(rows);
    return enc;
  }

  if (p.mode == EncoderMode::AttentiveTree) enc.context = sequence_context(inputs, p.seq, p.pooling);

  std::vector<NodeState> states(tree.size());
  std::vector<NodeState> kids;
  for (int id : tree.post_order()) {
    const DepNode& node = tree.node(id);
    kids.clear();
    for (int c : node.children) kids.push_back(states[c - 1]);
    Var x = inputs[id - 1];
    if (p.mode == EncoderMode::Tree) {
      states[id - 1] = child_sum_cell(x, kids, p.cell);
    } else {
      AttentionResult att;
      states[id - 1] = attentive_cell(x, kids, enc.context, p.cell, p.attn, &att);
      if (!kids.empty()) enc.alphas[id - 1] = att.alpha;
    }
  }
  for (std::size_t k = 0; k < states.size(); ++k) rows[k] = states[k].h;
  enc.root = states[tree.root() - 1];
  enc.H = concat_rows(rows);
  return enc;
}

Encoding encode_tree(Tape& tape, const DepTree& tree, const EmbeddingTable& emb,
                     const EncoderParams& p) {
  std::vector<Var> inputs;
  inputs.reserve(tree.size());
  for (const auto& node : tree.nodes()) inputs.push_back(tape.constant(Tensor::vector(emb.lookup(node.token))));
  return encode_tree(tree, inputs, p);
}

void init_encoder(ParamStore& store, const ModelConfig& cfg, Rng& rng) {
  switch (cfg.encoder) {
    case EncoderMode::AttentiveTree:
      CellParams::init(store, "cell", cfg.emb_dim, cfg.hidden_dim, rng);
      AttnParams::init(store, "attn", cfg.hidden_dim, cfg.attn_dim, rng);
      CellParams::init(store, "seq", cfg.emb_dim, cfg.hidden_dim, rng);
      break;
    case EncoderMode::Tree:
      CellParams::init(store, "cell", cfg.emb_dim, cfg.hidden_dim, rng);
      break;
    case EncoderMode::Sequential:
      CellParams::init(store, "seq", cfg.emb_dim, cfg.hidden_dim, rng);
      break;
  }
}

EncoderParams bind_encoder(const ParamBinder& bind, const ModelConfig& cfg) {
  EncoderParams p;
  p.mode = cfg.encoder;
  p.pooling = cfg.context;
  if (cfg.encoder != EncoderMode::Sequential) p.cell = CellParams::bind(bind, "cell");
  if (cfg.encoder == EncoderMode::AttentiveTree) p.attn = AttnParams::bind(bind, "attn");
  if (cfg.encoder != EncoderMode::Tree) p.seq = CellParams::bind(bind, "seq");
  return p;
}

}  // namespace atn
