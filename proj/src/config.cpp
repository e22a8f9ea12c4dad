#include "atn/config.hpp"

#include <algorithm>
#include <set>

#include "atn/error.hpp"

namespace atn {

std::string to_string(EncoderMode m) {
  switch (m) {
    case EncoderMode::AttentiveTree: return "attentive-tree";
    case EncoderMode::Tree: return "tree";
    case EncoderMode::Sequential: return "sequential";
  }
  return "";
}

std::string to_string(MatchScheme m) {
  switch (m) {
    case MatchScheme::VectorConcat: return "vector-concat";
    case MatchScheme::MeanDist: return "mean-dist";
    case MatchScheme::None: return "none";
  }
  return "";
}

std::string to_string(ContextPooling m) { return m == ContextPooling::Final ? "final" : "mean-pool"; }
std::string to_string(Activation m) { return m == Activation::Sigmoid ? "sigmoid" : "relu"; }

EncoderMode parse_encoder_mode(std::string_view s) {
  if (s == "attentive-tree") return EncoderMode::AttentiveTree;
  if (s == "tree") return EncoderMode::Tree;
  if (s == "sequential") return EncoderMode::Sequential;
  throw ConfigError("unknown encoder '" + std::string(s) + "' (attentive-tree|tree|sequential)");
}

MatchScheme parse_match_scheme(std::string_view s) {
  if (s == "vector-concat") return MatchScheme::VectorConcat;
  if (s == "mean-dist") return MatchScheme::MeanDist;
  if (s == "none") return MatchScheme::None;
  throw ConfigError("unknown match scheme '" + std::string(s) + "' (vector-concat|mean-dist|none)");
}

ContextPooling parse_context_pooling(std::string_view s) {
  if (s == "final") return ContextPooling::Final;
  if (s == "mean-pool") return ContextPooling::MeanPool;
  throw ConfigError("unknown context pooling '" + std::string(s) + "' (final|mean-pool)");
}

Activation parse_activation(std::string_view s) {
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "relu") return Activation::Relu;
  throw ConfigError("unknown activation '" + std::string(s) + "' (sigmoid|relu)");
}

std::size_t ModelConfig::feature_dim() const {
  std::size_t flat = hops * projection_dim();
  switch (match) {
    case MatchScheme::VectorConcat: return 4 * flat;
    case MatchScheme::MeanDist: return 2 * flat + 1;
    case MatchScheme::None: return 4 * hidden_dim;
  }
  return 0;
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be >= 1");
  };
  positive(emb_dim, "emb_dim");
  positive(hidden_dim, "hidden_dim");
  positive(attn_dim, "attn_dim");
  positive(agg_attn_dim, "agg_attn_dim");
  positive(mlp_hidden1, "mlp_hidden1");
  positive(mlp_hidden2, "mlp_hidden2");
  positive(hops, "hops");
}

void TrainConfig::validate() const {
  if (!(lr > 0)) throw ConfigError("lr must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(dropout >= 0 && dropout < 1)) throw ConfigError("dropout must be in [0, 1)");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (grad_clip < 0) throw ConfigError("grad_clip must be >= 0");
  model.validate();
}

nlohmann::json to_json(const TrainConfig& c) {
  const ModelConfig& m = c.model;
  return {
      {"lr", c.lr},
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"dropout", c.dropout},
      {"seed", c.seed},
      {"eval_every", c.eval_every},
      {"grad_clip", c.grad_clip},
      {"emb_dim", m.emb_dim},
      {"hidden_dim", m.hidden_dim},
      {"attn_dim", m.attn_dim},
      {"agg_attn_dim", m.agg_attn_dim},
      {"proj_dim", m.projection_dim()},
      {"mlp_hidden1", m.mlp_hidden1},
      {"mlp_hidden2", m.mlp_hidden2},
      {"hops", m.hops},
      {"encoder", to_string(m.encoder)},
      {"match", to_string(m.match)},
      {"context", to_string(m.context)},
      {"second_activation", to_string(m.second_activation)},
      {"trainable_embeddings", m.trainable_embeddings},
  };
}

namespace {

template <typename T>
T get_as(const nlohmann::json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ConfigError("config key '" + key + "' must be a non-negative integer");
    } else if constexpr (std::is_same_v<T, int>) {
      if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("config key '" + key + "' must be a boolean");
    } else {
      if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
    }
    return v.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

}  // namespace

void apply_json(TrainConfig& c, const nlohmann::json& j, const std::vector<std::string>& extra_keys) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ModelConfig& m = c.model;
  for (const auto& [key, v] : j.items()) {
    if (key == "lr") c.lr = get_as<double>(v, key);
    else if (key == "epochs") c.epochs = get_as<int>(v, key);
    else if (key == "batch_size") c.batch_size = get_as<int>(v, key);
    else if (key == "dropout") c.dropout = get_as<double>(v, key);
    else if (key == "seed") c.seed = get_as<std::uint64_t>(v, key);
    else if (key == "eval_every") c.eval_every = get_as<int>(v, key);
    else if (key == "grad_clip") c.grad_clip = get_as<double>(v, key);
    else if (key == "emb_dim") m.emb_dim = get_as<std::size_t>(v, key);
    else if (key == "hidden_dim") m.hidden_dim = get_as<std::size_t>(v, key);
    else if (key == "attn_dim") m.attn_dim = get_as<std::size_t>(v, key);
    else if (key == "agg_attn_dim") m.agg_attn_dim = get_as<std::size_t>(v, key);
    else if (key == "proj_dim") m.proj_dim = get_as<std::size_t>(v, key);
    else if (key == "mlp_hidden1") m.mlp_hidden1 = get_as<std::size_t>(v, key);
    else if (key == "mlp_hidden2") m.mlp_hidden2 = get_as<std::size_t>(v, key);
    else if (key == "hops") m.hops = get_as<std::size_t>(v, key);
    else if (key == "encoder") m.encoder = parse_encoder_mode(get_as<std::string>(v, key));
    else if (key == "match") m.match = parse_match_scheme(get_as<std::string>(v, key));
    else if (key == "context") m.context = parse_context_pooling(get_as<std::string>(v, key));
    else if (key == "second_activation") m.second_activation = parse_activation(get_as<std::string>(v, key));
    else if (key == "trainable_embeddings") m.trainable_embeddings = get_as<bool>(v, key);
    else if (std::find(extra_keys.begin(), extra_keys.end(), key) == extra_keys.end())
      throw ConfigError("unknown config key '" + key + "'");
  }
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  apply_json(c, j);
  c.validate();
  return c;
}

}  // namespace atn
