#pragma once

#include "atn/autograd.hpp"
#include "atn/config.hpp"
#include "atn/params.hpp"

namespace atn {

struct AggParams {
  Var W_s1;  // d_a x d
  Var W_s2;  // r x d_a
  Var W_f;   // d x d_f

  static void init(ParamStore& store, std::size_t hidden_dim, std::size_t agg_attn_dim,
                   std::size_t hops, std::size_t proj_dim, Rng& rng);
  static AggParams bind(const ParamBinder& bind);
};

struct HopAttention {
  Var A;  // r x n annotation matrix, rows sum to 1
  Var M;  // r x d context matrix
};

// A = softmax_rows(W_s2 tanh(W_s1 H^T)), M = A H.
HopAttention multi_hop_attention(Var H, const AggParams& p);

// Row-major flatten of tanh(M W_f), length r * d_f.
Var project(Var M, const AggParams& p);

// vector-concat and none: [a; b; |a - b|; a * b]
// mean-dist:              [|a - b|; a * b; mean(|a - b|)]
Var match_features(Var a, Var b, MatchScheme scheme);

}  // namespace atn
