#include "atn/classifier.hpp"

#include <algorithm>
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

Tensor zero_bias(std::size_t n) { return Tensor(Dims{n}, true); }

}  // namespace

void MlpParams::init(ParamStore& store, std::size_t in_dim, std::size_t h1, std::size_t h2, Rng& rng) {
  store.add("mlp.W_1", init_matrix(h1, in_dim, rng));
  store.add("mlp.b_1", zero_bias(h1));
  store.add("mlp.W_2", init_matrix(h2, h1, rng));
  store.add("mlp.b_2", zero_bias(h2));
  store.add("mlp.W_3", init_matrix(2, h2, rng));
  store.add("mlp.b_3", zero_bias(2));
}

MlpParams MlpParams::bind(const ParamBinder& b) {
  return MlpParams{b("mlp.W_1"), b("mlp.b_1"), b("mlp.W_2"), b("mlp.b_2"), b("mlp.W_3"), b("mlp.b_3")};
}

Var Dropout::apply(Var x) {
  if (!enabled_) return x;
  double keep = 1.0 - rate_;
  Tensor mask(x.dims());
  for (double& m : mask.value()) m = rng_.uniform() < keep ? 1.0 / keep : 0.0;
  return hadamard(x, x.tape().constant(std::move(mask)));
}

Var mlp_forward(Var features, const MlpParams& p, Activation second, Dropout* dropout) {
  const Tensor& w1 = p.W_1.value();
  if (features.value().rank() != 1 || features.size() != w1.cols()) {
    throw ShapeError("mlp_forward: feature vector " + dims_str(features.dims()) +
                     " does not match W_1 " + dims_str(w1.dims()));
  }
  Var y1 = relu(add(matmul(p.W_1, features), p.b_1));
  if (dropout) y1 = dropout->apply(y1);
  Var pre2 = add(matmul(p.W_2, y1), p.b_2);
  Var y2 = second == Activation::Sigmoid ? sigmoid(pre2) : relu(pre2);
  return softmax_rows(add(matmul(p.W_3, y2), p.b_3));
}

Var cross_entropy(Var probs, Label gold) {
  return scale(log_floor(pick(probs, static_cast<std::size_t>(gold)), kProbFloor), -1.0);
}

double cross_entropy(const std::array<double, 2>& probs, Label gold) {
  return -std::log(std::max(probs[static_cast<std::size_t>(gold)], kProbFloor));
}

Label predict(const std::array<double, 2>& probs) {
  return probs[1] > probs[0] ? Label::Neutral : Label::Entailment;
}

Prediction make_prediction(Var probs) {
  if (probs.size() != 2) throw ShapeError("prediction needs 2 probabilities, got " + dims_str(probs.dims()));
  Prediction p;
  p.probs = {probs.value()[0], probs.value()[1]};
  p.label = predict(p.probs);
  p.confidence = std::max(p.probs[0], p.probs[1]);
  return p;
}

}  // namespace atn
