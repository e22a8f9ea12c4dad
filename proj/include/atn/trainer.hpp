#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atn/config.hpp"
#include "atn/dataset.hpp"
#include "atn/embeddings.hpp"
#include "atn/model.hpp"

namespace atn {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  std::map<std::string, std::vector<double>> m;
  std::map<std::string, std::vector<double>> v;
};

// One bias-corrected Adam update from the gradients stored on each tensor.
void adam_step(ParamStore& params, AdamState& state, double lr);

// Scales all gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(ParamStore& params, double max_norm);

struct MetricsReport {
  std::optional<double> all, upward, downward, none;
  std::size_t n_all = 0, n_upward = 0, n_downward = 0, n_none = 0;
  // confusion[gold][predicted], index 0 = entailment.
  std::size_t confusion[2][2] = {{0, 0}, {0, 0}};

  bool operator==(const MetricsReport& o) const;
};

nlohmann::json to_json(const MetricsReport& r);
// Upward / Downward / None / All accuracy table.
std::string format_table(const MetricsReport& r);

std::vector<Prediction> predict_all(const Model& model, const EmbeddingTable& emb,
                                    const std::vector<ExamplePair>& data, int threads = 1);
MetricsReport evaluate(const Model& model, const EmbeddingTable& emb,
                       const std::vector<ExamplePair>& data, int threads = 1);
MetricsReport score(const std::vector<ExamplePair>& data, const std::vector<Label>& predicted);

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  std::optional<double> train_accuracy;
  std::optional<double> dev_accuracy;
};

struct TrainOptions {
  bool track_train_accuracy = false;
  int threads = 1;
  std::function<void(const EpochLog&)> on_epoch;
};

struct TrainResult {
  Model best;
  AdamState adam;
  std::vector<EpochLog> log;
  int best_epoch = 0;
  std::optional<double> best_dev_accuracy;
};

// Mini-batch Adam over per-example graphs. `model` is trained in place and
// ends at the last epoch; `best` holds the best-dev snapshot (last epoch
// when dev is empty).
TrainResult train(const TrainConfig& cfg, Model& model, const EmbeddingTable& emb,
                  const std::vector<ExamplePair>& train_data,
                  const std::vector<ExamplePair>& dev_data, const TrainOptions& opts = {});

// Average cross-entropy over `batch` with gradients accumulated into the
// model tensors (caller zeroes them first).
double accumulate_batch_gradients(Model& model, const EmbeddingTable& emb,
                                  const std::vector<const ExamplePair*>& batch, Dropout* dropout);

double mean_loss(const Model& model, const EmbeddingTable& emb, const std::vector<ExamplePair>& data);

}  // namespace atn
