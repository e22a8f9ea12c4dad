#include "atn/aggregator.hpp"

#include <array>
#include <cmath>

#include "atn/error.hpp"

namespace atn {

namespace {

Tensor init_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  Tensor t(Dims{rows, cols}, true);
  for (double& v : t.value()) v = rng.uniform(-bound, bound);
  return t;
}

}  // namespace

void AggParams::init(ParamStore& store, std::size_t hidden_dim, std::size_t agg_attn_dim,
                     std::size_t hops, std::size_t proj_dim, Rng& rng) {
  store.add("agg.W_s1", init_matrix(agg_attn_dim, hidden_dim, rng));
  store.add("agg.W_s2", init_matrix(hops, agg_attn_dim, rng));
  store.add("agg.W_f", init_matrix(hidden_dim, proj_dim, rng));
}

AggParams AggParams::bind(const ParamBinder& bind) {
  return AggParams{bind("agg.W_s1"), bind("agg.W_s2"), bind("agg.W_f")};
}

HopAttention multi_hop_attention(Var H, const AggParams& p) {
  if (H.value().rank() != 2 || H.value().rows() == 0) {
    throw ShapeError("multi_hop_attention: H must be a non-empty matrix, got " + dims_str(H.dims()));
  }
  Var hidden = tanh(matmul(p.W_s1, transpose(H)));
  Var A = softmax_rows(matmul(p.W_s2, hidden));
  return {A, matmul(A, H)};
}

Var project(Var M, const AggParams& p) {
  Var F = tanh(matmul(M, p.W_f));
  return reshape(F, Dims{F.size()});
}

Var match_features(Var a, Var b, MatchScheme scheme) {
  if (a.size() != b.size()) {
    throw ShapeError("match_features: length mismatch " + dims_str(a.dims()) + " vs " +
                     dims_str(b.dims()));
  }
  Var dist = abs(sub(a, b));
  Var prod = hadamard(a, b);
  if (scheme == MatchScheme::MeanDist) {
    std::array<Var, 3> parts{dist, prod, mean_all(dist)};
    return concat_vec(parts);
  }
  std::array<Var, 4> parts{a, b, dist, prod};
  return concat_vec(parts);
}

}  // namespace atn
