#include "atn/diagnostics.hpp"

namespace atn {

namespace {

ExamplePair make_pair(const char* id, DepTree p, DepTree h, Label label, Monotonicity m) {
  ExamplePair ex;
  ex.id = id;
  ex.premise = std::move(p);
  ex.hypothesis = std::move(h);
  ex.label = label;
  ex.monotonicity = m;
  return ex;
}

}  // namespace

GradCheckFixture make_grad_check_fixture(EncoderMode encoder, MatchScheme match,
                                         std::uint64_t seed) {
  GradCheckFixture fx;
  ModelConfig& c = fx.config;
  c.emb_dim = 6;
  c.hidden_dim = 8;
  c.attn_dim = 5;
  c.agg_attn_dim = 6;
  c.proj_dim = 8;
  c.mlp_hidden1 = 10;
  c.mlp_hidden2 = 6;
  c.hops = 2;
  c.encoder = encoder;
  c.match = match;

  Rng rng(20240611);
  for (const char* tok : {"no", "some", "students", "new", "carry", "laptops", "computers", "dogs",
                          "bark", "animals", "loudly"}) {
    std::vector<double> v(c.emb_dim);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    fx.embeddings.add(tok, std::move(v));
  }

  // Both pairs share a label so their loss gradients do not cancel.
  // "no new students carry laptops": carry <- students <- {no, new}; carry <- laptops
  fx.pairs.push_back(make_pair(
      "toy-1",
      DepTree({"no", "students", "carry", "computers"}, {2, 3, 0, 3}),
      DepTree({"no", "new", "students", "carry", "laptops"}, {3, 3, 4, 0, 4}), Label::Entailment,
      Monotonicity::Downward));
  fx.pairs.push_back(make_pair(
      "toy-2",
      DepTree({"some", "dogs", "bark", "loudly"}, {2, 3, 0, 3}),
      DepTree({"some", "animals", "bark"}, {2, 3, 0}), Label::Entailment, Monotonicity::Upward));

  fx.model = Model(c, seed);
  Rng init(seed);
  for (const auto& name : fx.model.params().names()) {
    bool score = name == "attn.W_m" || name == "attn.U_m" || name == "attn.w";
    double bound = score ? 3.0 : 1.0;
    for (double& v : fx.model.params().at(name).data()) v = init.uniform(-bound, bound);
  }
  return fx;
}

GradCheckResult model_grad_check(Model& model, const EmbeddingTable& emb,
                                 const std::vector<ExamplePair>& pairs, double eps) {
  LossBuilder f = [&](Tape& tape) {
    ParamBinder bind(tape, model.params());
    ModelVars vars = bind_model(bind, model.config());
    std::vector<Var> losses;
    for (const auto& ex : pairs) {
      ForwardResult r = forward(bind, model.config(), vars, emb, ex, nullptr);
      losses.push_back(cross_entropy(r.probs, *ex.label));
    }
    return scale(add_n(losses), 1.0 / static_cast<double>(losses.size()));
  };
  return grad_check(f, model.params(), eps);
}

}  // namespace atn
