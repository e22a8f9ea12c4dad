#pragma once

#include <array>

#include "atn/autograd.hpp"
#include "atn/config.hpp"
#include "atn/dataset.hpp"
#include "atn/params.hpp"

namespace atn {

inline constexpr double kProbFloor = 1e-12;

struct MlpParams {
  Var W_1, b_1;  // h1 x |F_r|
  Var W_2, b_2;  // h2 x h1
  Var W_3, b_3;  // 2 x h2

  static void init(ParamStore& store, std::size_t in_dim, std::size_t h1, std::size_t h2, Rng& rng);
  static MlpParams bind(const ParamBinder& bind);
};

// Inverted dropout. Disabled sources (rate 0 or training off) pass inputs
// through untouched, so evaluation needs no rescaling.
class Dropout {
 public:
  Dropout() = default;
  Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed), enabled_(rate > 0) {}

  bool enabled() const { return enabled_; }
  double rate() const { return rate_; }
  Var apply(Var x);

 private:
  double rate_ = 0.0;
  Rng rng_{0};
  bool enabled_ = false;
};

struct Prediction {
  std::array<double, 2> probs{};
  Label label = Label::Entailment;
  double confidence = 0.0;
};

// Y1 = relu(W_1 F + b_1), dropout on Y1, Y2 = act(W_2 Y1 + b_2),
// probs = softmax(W_3 Y2 + b_3). `act` is sigmoid unless overridden.
Var mlp_forward(Var features, const MlpParams& p, Activation second = Activation::Sigmoid,
                Dropout* dropout = nullptr);

// -log(max(probs[gold], 1e-12))
Var cross_entropy(Var probs, Label gold);
double cross_entropy(const std::array<double, 2>& probs, Label gold);

// Argmax; exact ties go to entailment.
Label predict(const std::array<double, 2>& probs);
Prediction make_prediction(Var probs);

}  // namespace atn
