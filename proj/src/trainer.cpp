#include "atn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include "atn/error.hpp"

namespace atn {

void adam_step(ParamStore& params, AdamState& state, double lr) {
  for (const auto& name : params.names()) {
    const Tensor& t = params.at(name);
    if (t.requires_grad() && !t.has_grad()) {
      throw Error("adam_step: missing gradient for parameter '" + name + "'");
    }
  }
  ++state.t;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (const auto& name : params.names()) {
    Tensor& t = params.at(name);
    if (!t.requires_grad()) continue;
    auto g = t.grad();
    auto& m = state.m[name];
    auto& v = state.v[name];
    if (m.size() != t.size()) m.assign(t.size(), 0.0);
    if (v.size() != t.size()) v.assign(t.size(), 0.0);
    auto val = t.value();
    for (std::size_t i = 0; i < t.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      val[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

double clip_grad_norm(ParamStore& params, double max_norm) {
  double sq = 0.0;
  for (const auto& name : params.names()) {
    for (double g : params.at(name).grad()) sq += g * g;
  }
  double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    double s = max_norm / norm;
    for (const auto& name : params.names()) {
      Tensor& t = params.at(name);
      if (!t.has_grad()) continue;
      for (double& g : t.grad()) g *= s;
    }
  }
  return norm;
}

bool MetricsReport::operator==(const MetricsReport& o) const {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (confusion[i][j] != o.confusion[i][j]) return false;
  return all == o.all && upward == o.upward && downward == o.downward && none == o.none &&
         n_all == o.n_all && n_upward == o.n_upward && n_downward == o.n_downward && n_none == o.n_none;
}

nlohmann::json to_json(const MetricsReport& r) {
  auto acc = [](const std::optional<double>& a) -> nlohmann::json {
    return a ? nlohmann::json(*a) : nlohmann::json(nullptr);
  };
  return {
      {"all", acc(r.all)},
      {"upward", acc(r.upward)},
      {"downward", acc(r.downward)},
      {"none", acc(r.none)},
      {"n", {{"all", r.n_all}, {"upward", r.n_upward}, {"downward", r.n_downward}, {"none", r.n_none}}},
      {"confusion",
       {{"labels", {"entailment", "neutral"}},
        {"rows", "gold"},
        {"matrix", {{r.confusion[0][0], r.confusion[0][1]}, {r.confusion[1][0], r.confusion[1][1]}}}}},
  };
}

std::string format_table(const MetricsReport& r) {
  auto cell = [](const std::optional<double>& a) {
    std::ostringstream os;
    if (a) os << std::fixed << std::setprecision(1) << 100.0 * *a;
    else os << "-";
    return os.str();
  };
  std::ostringstream os;
  os << std::left << std::setw(10) << "Upward" << std::setw(10) << "Downward" << std::setw(10)
     << "None" << std::setw(10) << "All" << '\n';
  os << std::setw(10) << cell(r.upward) << std::setw(10) << cell(r.downward) << std::setw(10)
     << cell(r.none) << std::setw(10) << cell(r.all) << '\n';
  os << std::setw(10) << ("n=" + std::to_string(r.n_upward)) << std::setw(10)
     << ("n=" + std::to_string(r.n_downward)) << std::setw(10) << ("n=" + std::to_string(r.n_none))
     << std::setw(10) << ("n=" + std::to_string(r.n_all)) << '\n';
  return os.str();
}

std::vector<Prediction> predict_all(const Model& model, const EmbeddingTable& emb,
                                    const std::vector<ExamplePair>& data, int threads) {
  std::vector<Prediction> out(data.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Tape tape;
      try {
        out[i] = make_prediction(forward(tape, model, emb, data[i]).probs);
      } catch (const Error& e) {
        throw Error("example '" + data[i].id + "': " + e.what());
      }
    }
  };
  std::size_t n_threads = static_cast<std::size_t>(std::max(1, threads));
  n_threads = std::min(n_threads, std::max<std::size_t>(1, data.size()));
  if (n_threads == 1) {
    work(0, data.size());
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n_threads);
  std::size_t chunk = (data.size() + n_threads - 1) / n_threads;
  for (std::size_t t = 0; t < n_threads; ++t) {
    std::size_t b = t * chunk, e = std::min(data.size(), b + chunk);
    pool.emplace_back([&, t, b, e] {
      try {
        work(b, e);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

MetricsReport score(const std::vector<ExamplePair>& data, const std::vector<Label>& predicted) {
  if (data.size() != predicted.size()) throw Error("score: prediction count mismatch");
  MetricsReport r;
  std::size_t correct_all = 0, c_up = 0, c_down = 0, c_none = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data[i].label) throw Error("example '" + data[i].id + "' has no gold label");
    int gold = static_cast<int>(*data[i].label);
    int pred = static_cast<int>(predicted[i]);
    bool ok = gold == pred;
    ++r.confusion[gold][pred];
    ++r.n_all;
    correct_all += ok;
    if (!data[i].monotonicity) continue;
    switch (*data[i].monotonicity) {
      case Monotonicity::Upward: ++r.n_upward; c_up += ok; break;
      case Monotonicity::Downward: ++r.n_downward; c_down += ok; break;
      case Monotonicity::None: ++r.n_none; c_none += ok; break;
    }
  }
  auto ratio = [](std::size_t c, std::size_t n) -> std::optional<double> {
    if (n == 0) return std::nullopt;
    return static_cast<double>(c) / static_cast<double>(n);
  };
  r.all = ratio(correct_all, r.n_all);
  r.upward = ratio(c_up, r.n_upward);
  r.downward = ratio(c_down, r.n_downward);
  r.none = ratio(c_none, r.n_none);
  return r;
}

MetricsReport evaluate(const Model& model, const EmbeddingTable& emb,
                       const std::vector<ExamplePair>& data, int threads) {
  auto preds = predict_all(model, emb, data, threads);
  std::vector<Label> labels;
  labels.reserve(preds.size());
  for (const auto& p : preds) labels.push_back(p.label);
  return score(data, labels);
}

double accumulate_batch_gradients(Model& model, const EmbeddingTable& emb,
                                  const std::vector<const ExamplePair*>& batch, Dropout* dropout) {
  double total = 0.0;
  const double w = 1.0 / static_cast<double>(batch.size());
  for (const ExamplePair* ex : batch) {
    if (!ex->label) throw Error("example '" + ex->id + "' has no gold label");
    try {
      Tape tape;
      ForwardResult r = forward(tape, model, emb, *ex, dropout);
      Var loss = cross_entropy(r.probs, *ex->label);
      total += loss.item();
      tape.backward(scale(loss, w));
    } catch (const Error& e) {
      throw Error("example '" + ex->id + "': " + e.what());
    }
  }
  return total * w;
}

double mean_loss(const Model& model, const EmbeddingTable& emb, const std::vector<ExamplePair>& data) {
  double total = 0.0;
  for (const auto& ex : data) {
    Tape tape;
    total += cross_entropy(forward(tape, model, emb, ex).probs, *ex.label).item();
  }
  return total / static_cast<double>(data.size());
}

TrainResult train(const TrainConfig& cfg, Model& model, const EmbeddingTable& emb,
                  const std::vector<ExamplePair>& train_data,
                  const std::vector<ExamplePair>& dev_data, const TrainOptions& opts) {
  cfg.validate();
  if (train_data.empty()) throw Error("train: empty training set");

  ParamStore& params = model.params();
  for (const auto& name : params.names()) {
    Tensor& t = params.at(name);
    t.set_requires_grad(true);
    t.grad();
  }

  TrainResult res;
  Rng shuffle_rng(cfg.seed);
  Dropout dropout(cfg.dropout, cfg.seed ^ 0xd1b54a32d192ed03ULL);
  std::vector<std::size_t> order(train_data.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch_size = static_cast<std::size_t>(cfg.batch_size);
  bool have_best = false;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      std::vector<const ExamplePair*> batch;
      for (std::size_t k = start; k < std::min(order.size(), start + batch_size); ++k)
        batch.push_back(&train_data[order[k]]);
      params.zero_grad();
      double batch_loss = accumulate_batch_gradients(model, emb, batch, &dropout);
      loss_sum += batch_loss * static_cast<double>(batch.size());
      if (cfg.grad_clip > 0) clip_grad_norm(params, cfg.grad_clip);
      adam_step(params, res.adam, cfg.lr);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.mean_loss = loss_sum / static_cast<double>(train_data.size());
    if (opts.track_train_accuracy) entry.train_accuracy = evaluate(model, emb, train_data, opts.threads).all;
    bool eval_now = !dev_data.empty() && (epoch % cfg.eval_every == 0 || epoch == cfg.epochs);
    if (eval_now) {
      entry.dev_accuracy = evaluate(model, emb, dev_data, opts.threads).all;
      if (!have_best || *entry.dev_accuracy > *res.best_dev_accuracy) {
        have_best = true;
        res.best_dev_accuracy = entry.dev_accuracy;
        res.best_epoch = epoch;
        res.best = Model(model.config(), params.clone());
      }
    }
    res.log.push_back(entry);
    if (opts.on_epoch) opts.on_epoch(entry);
  }
  if (!have_best) {
    res.best_epoch = cfg.epochs;
    res.best = Model(model.config(), params.clone());
  }
  return res;
}

}  // namespace atn
