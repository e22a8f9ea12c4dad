#pragma once

#include <optional>
#include <set>
#include <string>

#include "atn/aggregator.hpp"
#include "atn/classifier.hpp"
#include "atn/config.hpp"
#include "atn/dataset.hpp"
#include "atn/embeddings.hpp"
#include "atn/encoder.hpp"
#include "atn/params.hpp"

namespace atn {

// Full premise/hypothesis network. One parameter set serves both sentences.
class Model {
 public:
  Model() = default;
  Model(const ModelConfig& cfg, std::uint64_t seed);
  Model(const ModelConfig& cfg, ParamStore params) : cfg_(cfg), params_(std::move(params)) {}

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // With trainable embeddings, registers "emb/<token>" copies of the table
  // rows for `tokens` that resolve in it. OOV tokens stay fixed.
  void add_trainable_embeddings(const EmbeddingTable& emb, const std::set<std::string>& tokens);

  static std::string embedding_param(const std::string& key) { return "emb/" + key; }

 private:
  ModelConfig cfg_;
  ParamStore params_;
};

struct ModelVars {
  EncoderParams encoder;
  std::optional<AggParams> aggregator;
  MlpParams mlp;
};

ModelVars bind_model(const ParamBinder& bind, const ModelConfig& cfg);

struct ForwardResult {
  Var probs;
  Var features;
  Encoding premise;
  Encoding hypothesis;
  std::optional<HopAttention> premise_attention;
  std::optional<HopAttention> hypothesis_attention;
};

// Builds the per-example graph. `dropout` is null at evaluation time.
ForwardResult forward(const ParamBinder& bind, const ModelConfig& cfg, const ModelVars& vars,
                      const EmbeddingTable& emb, const ExamplePair& ex, Dropout* dropout = nullptr);
ForwardResult forward(Tape& tape, Model& model, const EmbeddingTable& emb, const ExamplePair& ex,
                      Dropout* dropout = nullptr);
ForwardResult forward(Tape& tape, const Model& model, const EmbeddingTable& emb,
                      const ExamplePair& ex);

std::set<std::string> collect_tokens(const std::vector<ExamplePair>& pairs);

}  // namespace atn
