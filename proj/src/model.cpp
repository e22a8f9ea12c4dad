#include "atn/model.hpp"

#include "atn/error.hpp"

namespace atn {

Model::Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(seed);
  init_encoder(params_, cfg_, rng);
  if (cfg_.match != MatchScheme::None) {
    AggParams::init(params_, cfg_.hidden_dim, cfg_.agg_attn_dim, cfg_.hops, cfg_.projection_dim(), rng);
  }
  MlpParams::init(params_, cfg_.feature_dim(), cfg_.mlp_hidden1, cfg_.mlp_hidden2, rng);
}

void Model::add_trainable_embeddings(const EmbeddingTable& emb, const std::set<std::string>& tokens) {
  if (!cfg_.trainable_embeddings) return;
  for (const auto& tok : tokens) {
    auto key = emb.resolve(tok);
    if (!key || params_.contains(embedding_param(*key))) continue;
    params_.add(embedding_param(*key), Tensor(Dims{emb.dim()}, emb.lookup(*key), true));
  }
}

ModelVars bind_model(const ParamBinder& bind, const ModelConfig& cfg) {
  ModelVars v;
  v.encoder = bind_encoder(bind, cfg);
  if (cfg.match != MatchScheme::None) v.aggregator = AggParams::bind(bind);
  v.mlp = MlpParams::bind(bind);
  return v;
}

namespace {

std::vector<Var> embed(const ParamBinder& bind, const ModelConfig& cfg, const EmbeddingTable& emb,
                       const DepTree& tree) {
  std::vector<Var> out;
  out.reserve(tree.size());
  for (const auto& node : tree.nodes()) {
    if (cfg.trainable_embeddings) {
      if (auto key = emb.resolve(node.token)) {
        std::string name = Model::embedding_param(*key);
        if (bind.store().contains(name)) {
          out.push_back(bind(name));
          continue;
        }
      }
    }
    out.push_back(bind.tape().constant(Tensor::vector(emb.lookup(node.token))));
  }
  return out;
}

}  // namespace

ForwardResult forward(const ParamBinder& bind, const ModelConfig& cfg, const ModelVars& vars,
                      const EmbeddingTable& emb, const ExamplePair& ex, Dropout* dropout) {
  if (emb.dim() != cfg.emb_dim) {
    throw ShapeError("embedding table dim " + std::to_string(emb.dim()) + " != model emb_dim " +
                     std::to_string(cfg.emb_dim));
  }
  ForwardResult r;
  auto xp = embed(bind, cfg, emb, ex.premise);
  auto xh = embed(bind, cfg, emb, ex.hypothesis);
  r.premise = encode_tree(ex.premise, xp, vars.encoder);
  r.hypothesis = encode_tree(ex.hypothesis, xh, vars.encoder);
  if (cfg.match == MatchScheme::None) {
    r.features = match_features(r.premise.root.h, r.hypothesis.root.h, MatchScheme::None);
  } else {
    r.premise_attention = multi_hop_attention(r.premise.H, *vars.aggregator);
    r.hypothesis_attention = multi_hop_attention(r.hypothesis.H, *vars.aggregator);
    Var fp = project(r.premise_attention->M, *vars.aggregator);
    Var fh = project(r.hypothesis_attention->M, *vars.aggregator);
    r.features = match_features(fp, fh, cfg.match);
  }
  Var feats = dropout ? dropout->apply(r.features) : r.features;
  r.probs = mlp_forward(feats, vars.mlp, cfg.second_activation, dropout);
  return r;
}

ForwardResult forward(Tape& tape, Model& model, const EmbeddingTable& emb, const ExamplePair& ex,
                      Dropout* dropout) {
  ParamBinder bind(tape, model.params());
  ModelVars vars = bind_model(bind, model.config());
  return forward(bind, model.config(), vars, emb, ex, dropout);
}

ForwardResult forward(Tape& tape, const Model& model, const EmbeddingTable& emb, const ExamplePair& ex) {
  ParamBinder bind(tape, model.params());
  ModelVars vars = bind_model(bind, model.config());
  return forward(bind, model.config(), vars, emb, ex, nullptr);
}

std::set<std::string> collect_tokens(const std::vector<ExamplePair>& pairs) {
  std::set<std::string> out;
  for (const auto& ex : pairs) {
    for (const auto& n : ex.premise.nodes()) out.insert(n.token);
    for (const auto& n : ex.hypothesis.nodes()) out.insert(n.token);
  }
  return out;
}

}  // namespace atn
