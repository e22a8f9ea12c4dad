#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace atn {

enum class EncoderMode { AttentiveTree, Tree, Sequential };
enum class MatchScheme { VectorConcat, MeanDist, None };
// How the sentence context vector s is read off the sequential LSTM.
enum class ContextPooling { Final, MeanPool };
enum class Activation { Sigmoid, Relu };

std::string to_string(EncoderMode m);
std::string to_string(MatchScheme m);
std::string to_string(ContextPooling m);
std::string to_string(Activation m);
EncoderMode parse_encoder_mode(std::string_view s);
MatchScheme parse_match_scheme(std::string_view s);
ContextPooling parse_context_pooling(std::string_view s);
Activation parse_activation(std::string_view s);

struct ModelConfig {
  std::size_t emb_dim = 300;
  std::size_t hidden_dim = 150;    // d
  std::size_t attn_dim = 100;      // d_m, soft attention inside the cell
  std::size_t agg_attn_dim = 100;  // d_a, self-attention MLP width
  std::size_t proj_dim = 0;        // d_f; 0 means hidden_dim
  std::size_t mlp_hidden1 = 200;
  std::size_t mlp_hidden2 = 100;
  std::size_t hops = 15;
  EncoderMode encoder = EncoderMode::AttentiveTree;
  MatchScheme match = MatchScheme::VectorConcat;
  ContextPooling context = ContextPooling::Final;
  Activation second_activation = Activation::Sigmoid;
  bool trainable_embeddings = false;

  std::size_t projection_dim() const { return proj_dim ? proj_dim : hidden_dim; }
  // Length of the matching feature vector fed to the classifier.
  std::size_t feature_dim() const;
  void validate() const;
};

struct TrainConfig {
  double lr = 0.001;
  int epochs = 20;
  int batch_size = 32;
  double dropout = 0.5;
  std::uint64_t seed = 1;
  int eval_every = 1;
  double grad_clip = 0.0;  // global-norm clip; 0 disables
  ModelConfig model;

  void validate() const;
};

// Flat JSON objects. Unknown keys are rejected with ConfigError.
nlohmann::json to_json(const TrainConfig& c);
// Applies the keys of `j` onto `c`. Keys listed in `extra_keys` are ignored
// here so callers can layer their own fields on the same object.
void apply_json(TrainConfig& c, const nlohmann::json& j,
                const std::vector<std::string>& extra_keys = {});
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace atn
