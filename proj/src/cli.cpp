#include "atn/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "atn/checkpoint.hpp"
#include "atn/diagnostics.hpp"
#include "atn/error.hpp"
#include "atn/trainer.hpp"

namespace atn {

const std::vector<std::string>& RunConfig::path_keys() {
  static const std::vector<std::string> keys{
      "train", "dev", "test", "train_format", "dev_format", "test_format", "train_conllu",
      "dev_conllu", "test_conllu", "tsv_pair_id_column", "tsv_label_column",
      "tsv_monotonicity_column", "embeddings", "oov_seed", "checkpoint_out", "checkpoint_in",
      "report_out", "log_out", "input", "output", "threads", "index"};
  return keys;
}

void RunConfig::apply_json(const nlohmann::json& j) {
  atn::apply_json(train, j, path_keys());
  auto str = [&](const char* key, std::string& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_string()) throw ConfigError(std::string("config key '") + key + "' must be a string");
    dst = j[key].get<std::string>();
  };
  str("train", train_path);
  str("dev", dev_path);
  str("test", test_path);
  str("train_format", train_format);
  str("dev_format", dev_format);
  str("test_format", test_format);
  str("train_conllu", train_conllu);
  str("dev_conllu", dev_conllu);
  str("test_conllu", test_conllu);
  str("tsv_pair_id_column", tsv_pair_id_column);
  str("tsv_label_column", tsv_label_column);
  str("tsv_monotonicity_column", tsv_monotonicity_column);
  str("embeddings", embeddings);
  str("checkpoint_out", checkpoint_out);
  str("checkpoint_in", checkpoint_in);
  str("report_out", report_out);
  str("log_out", log_out);
  str("input", input);
  str("output", output);
  if (j.contains("oov_seed")) {
    if (!j["oov_seed"].is_number_unsigned()) throw ConfigError("config key 'oov_seed' must be a non-negative integer");
    oov_seed = j["oov_seed"].get<std::uint64_t>();
  }
  if (j.contains("threads")) {
    if (!j["threads"].is_number_integer()) throw ConfigError("config key 'threads' must be an integer");
    threads = j["threads"].get<int>();
  }
  if (j.contains("index")) {
    if (!j["index"].is_number_unsigned()) throw ConfigError("config key 'index' must be a non-negative integer");
    index = j["index"].get<std::size_t>();
  }
}

std::optional<TsvColumns> RunConfig::columns_for(const std::string& format,
                                                 const std::string& sidecar) const {
  if (format != "med-tsv") return std::nullopt;
  return TsvColumns{tsv_pair_id_column, tsv_label_column, tsv_monotonicity_column, sidecar};
}

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads, epochs, batch_size, hops;
  std::optional<std::string> encoder, match;
  std::optional<double> lr, dropout;
  std::optional<std::string> train, dev, test, embeddings, checkpoint_out, checkpoint_in, report_out,
      log_out, input, output, train_format, dev_format, test_format;
  std::optional<std::size_t> index;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Flat JSON config file");
  cmd->add_option("--seed", f.seed);
  cmd->add_option("--threads", f.threads, "Evaluation threads");
  cmd->add_option("--encoder", f.encoder, "attentive-tree|tree|sequential");
  cmd->add_option("--match", f.match, "vector-concat|mean-dist|none");
  cmd->add_option("--hops", f.hops);
  cmd->add_option("--lr", f.lr);
  cmd->add_option("--dropout", f.dropout);
  cmd->add_option("--epochs", f.epochs);
  cmd->add_option("--batch-size", f.batch_size);
  cmd->add_option("--train", f.train);
  cmd->add_option("--dev", f.dev);
  cmd->add_option("--test", f.test);
  cmd->add_option("--train-format", f.train_format, "jsonl|med-tsv");
  cmd->add_option("--dev-format", f.dev_format, "jsonl|med-tsv");
  cmd->add_option("--test-format", f.test_format, "jsonl|med-tsv");
  cmd->add_option("--embeddings", f.embeddings, "GloVe-format text file");
  cmd->add_option("--checkpoint-out", f.checkpoint_out);
  cmd->add_option("--checkpoint", f.checkpoint_in, "Checkpoint to load");
  cmd->add_option("--report-out", f.report_out);
  cmd->add_option("--log-out", f.log_out);
  cmd->add_option("--input", f.input);
  cmd->add_option("--output", f.output);
  cmd->add_option("--index", f.index, "inspect: 0-based pair index in --input");
}

RunConfig resolve(const Flags& f) {
  RunConfig rc;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw ConfigError("cannot read config file '" + f.config + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file '" + f.config + "': " + e.what());
    }
    rc.apply_json(j);
  }
  TrainConfig& t = rc.train;
  if (f.seed) t.seed = *f.seed;
  if (f.threads) rc.threads = *f.threads;
  if (f.encoder) t.model.encoder = parse_encoder_mode(*f.encoder);
  if (f.match) t.model.match = parse_match_scheme(*f.match);
  if (f.hops) {
    if (*f.hops < 1) throw ConfigError("--hops must be >= 1");
    t.model.hops = static_cast<std::size_t>(*f.hops);
  }
  if (f.lr) t.lr = *f.lr;
  if (f.dropout) t.dropout = *f.dropout;
  if (f.epochs) t.epochs = *f.epochs;
  if (f.batch_size) t.batch_size = *f.batch_size;
  auto set = [](const std::optional<std::string>& src, std::string& dst) {
    if (src) dst = *src;
  };
  set(f.train, rc.train_path);
  set(f.dev, rc.dev_path);
  set(f.test, rc.test_path);
  set(f.train_format, rc.train_format);
  set(f.dev_format, rc.dev_format);
  set(f.test_format, rc.test_format);
  set(f.embeddings, rc.embeddings);
  set(f.checkpoint_out, rc.checkpoint_out);
  set(f.checkpoint_in, rc.checkpoint_in);
  set(f.report_out, rc.report_out);
  set(f.log_out, rc.log_out);
  set(f.input, rc.input);
  set(f.output, rc.output);
  if (f.index) rc.index = *f.index;
  if (rc.threads < 1) throw ConfigError("--threads must be >= 1");
  t.validate();
  return rc;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string("missing required ") + flag);
}

void check_format(const std::string& format, const std::string& sidecar, const char* flag) {
  parse_dataset_format(format);
  if (format == "med-tsv" && sidecar.empty()) {
    throw ConfigError(std::string("med-tsv data needs a CoNLL-U sidecar (") + flag + ")");
  }
}

Dataset load_split(const RunConfig& rc, const std::string& path, const std::string& format,
                   const std::string& sidecar) {
  return load_dataset(path, parse_dataset_format(format), rc.columns_for(format, sidecar));
}

EmbeddingTable load_table(const RunConfig& rc, std::size_t dim, const std::set<std::string>& vocab) {
  return EmbeddingTable::load(rc.embeddings, dim, vocab, rc.oov_seed);
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

std::string now_iso8601() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Training config alone plus data-independent keys goes into checkpoints.
nlohmann::json checkpoint_config(const RunConfig& rc) { return to_json(rc.train); }

Model load_model(const RunConfig& rc, TrainConfig* cfg_out = nullptr) {
  Checkpoint ck = load_checkpoint(rc.checkpoint_in);
  if (cfg_out) *cfg_out = train_config_from_json(ck.config);
  return model_from_checkpoint(ck);
}

int cmd_train(const RunConfig& rc, std::ostream& out) {
  require(rc.train_path, "--train");
  require(rc.embeddings, "--embeddings");
  require(rc.checkpoint_out, "--checkpoint-out");
  check_format(rc.train_format, rc.train_conllu, "train_conllu");
  if (!rc.dev_path.empty()) check_format(rc.dev_format, rc.dev_conllu, "dev_conllu");

  Dataset train_set = load_split(rc, rc.train_path, rc.train_format, rc.train_conllu);
  Dataset dev_set;
  if (!rc.dev_path.empty()) dev_set = load_split(rc, rc.dev_path, rc.dev_format, rc.dev_conllu);
  auto vocab = collect_tokens(train_set.pairs);
  for (const auto& t : collect_tokens(dev_set.pairs)) vocab.insert(t);
  EmbeddingTable emb = load_table(rc, rc.train.model.emb_dim, vocab);

  Model model(rc.train.model, rc.train.seed);
  model.add_trainable_embeddings(emb, collect_tokens(train_set.pairs));
  TrainOptions opts;
  opts.threads = rc.threads;
  opts.on_epoch = [&out](const EpochLog& e) {
    out << "epoch " << e.epoch << " loss " << std::setprecision(6) << e.mean_loss;
    if (e.dev_accuracy) out << " dev " << *e.dev_accuracy;
    out << '\n';
  };
  TrainResult res = train(rc.train, model, emb, train_set.pairs, dev_set.pairs, opts);
  save_checkpoint(rc.checkpoint_out, res.best.params(), res.adam, checkpoint_config(rc));

  nlohmann::json log;
  log["config"] = to_json(rc.train);
  log["train_pairs"] = train_set.pairs.size();
  log["dropped_contradictions"] = train_set.dropped_contradictions + dev_set.dropped_contradictions;
  log["embedding_skipped_lines"] = emb.skipped_lines();
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : res.log) {
    nlohmann::json row{{"epoch", e.epoch}, {"mean_loss", e.mean_loss}};
    row["dev_accuracy"] = e.dev_accuracy ? nlohmann::json(*e.dev_accuracy) : nlohmann::json(nullptr);
    epochs.push_back(row);
  }
  log["epochs"] = epochs;
  log["best_epoch"] = res.best_epoch;
  log["best_dev_accuracy"] = res.best_dev_accuracy ? nlohmann::json(*res.best_dev_accuracy) : nlohmann::json(nullptr);
  log["timestamp"] = now_iso8601();
  std::string log_path = rc.log_out.empty() ? rc.checkpoint_out + ".log.json" : rc.log_out;
  write_text(log_path, log.dump(2) + "\n", out);
  out << "saved " << rc.checkpoint_out << " (best epoch " << res.best_epoch << ")\n";
  return 0;
}

int cmd_eval(const RunConfig& rc, std::ostream& out) {
  require(rc.checkpoint_in, "--checkpoint");
  require(rc.test_path, "--test");
  require(rc.embeddings, "--embeddings");
  check_format(rc.test_format, rc.test_conllu, "test_conllu");
  TrainConfig cfg;
  Model model = load_model(rc, &cfg);
  Dataset data = load_split(rc, rc.test_path, rc.test_format, rc.test_conllu);
  if (data.pairs.empty()) throw Error("eval: no usable pairs in '" + rc.test_path + "'");
  EmbeddingTable emb = load_table(rc, cfg.model.emb_dim, collect_tokens(data.pairs));
  MetricsReport report = evaluate(model, emb, data.pairs, rc.threads);
  nlohmann::json j = to_json(report);
  j["dropped_contradictions"] = data.dropped_contradictions;
  if (!rc.report_out.empty()) write_text(rc.report_out, j.dump(2) + "\n", out);
  else out << j.dump(2) << '\n';
  out << format_table(report);
  return 0;
}

int cmd_predict(const RunConfig& rc, std::ostream& out) {
  require(rc.checkpoint_in, "--checkpoint");
  require(rc.input, "--input");
  require(rc.embeddings, "--embeddings");
  TrainConfig cfg;
  Model model = load_model(rc, &cfg);
  Dataset data = load_jsonl(rc.input, false);
  EmbeddingTable emb = load_table(rc, cfg.model.emb_dim, collect_tokens(data.pairs));
  auto preds = predict_all(model, emb, data.pairs, rc.threads);
  std::ostringstream os;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    nlohmann::json row{{"id", data.pairs[i].id},
                       {"probs", {{"entailment", preds[i].probs[0]}, {"neutral", preds[i].probs[1]}}},
                       {"label", label_name(preds[i].label)},
                       {"confidence", preds[i].confidence}};
    os << row.dump() << '\n';
  }
  write_text(rc.output, os.str(), out);
  return 0;
}

int cmd_gradcheck(const RunConfig& rc, std::ostream& out) {
  GradCheckFixture fx = make_grad_check_fixture(rc.train.model.encoder, rc.train.model.match);
  GradCheckResult res = model_grad_check(fx.model, fx.embeddings, fx.pairs);
  out << std::scientific << std::setprecision(3) << "max relative error " << res.max_rel_err
      << " over " << res.entries << " entries (worst: " << res.worst_param << "[" << res.worst_index
      << "], analytic " << res.analytic
      << ", numeric " << res.numeric << ")\n";
  return res.max_rel_err < 1e-4 ? 0 : 1;
}

nlohmann::json inspect_sentence(const DepTree& tree, const Encoding& enc,
                                const std::optional<HopAttention>& att) {
  nlohmann::json j;
  j["tokens"] = tree.tokens();
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& node : tree.nodes()) {
    const auto& alpha = enc.alphas[static_cast<std::size_t>(node.index - 1)];
    if (!alpha) continue;
    nlohmann::json weights = nlohmann::json::array();
    for (std::size_t k = 0; k < node.children.size(); ++k) {
      int c = node.children[k];
      weights.push_back({{"child", c}, {"token", tree.node(c).token}, {"alpha", alpha->value()[k]}});
    }
    nodes.push_back({{"node", node.index}, {"token", node.token}, {"children", weights}});
  }
  j["alpha"] = nodes;
  if (att) {
    const Tensor& A = att->A.value();
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < A.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t c = 0; c < A.cols(); ++c) row.push_back(A.at(r, c));
      rows.push_back(row);
    }
    j["A"] = rows;
  } else {
    j["A"] = nullptr;
  }
  return j;
}

int cmd_inspect(const RunConfig& rc, std::ostream& out) {
  require(rc.checkpoint_in, "--checkpoint");
  require(rc.input, "--input");
  require(rc.embeddings, "--embeddings");
  TrainConfig cfg;
  Model model = load_model(rc, &cfg);
  Dataset data = load_jsonl(rc.input, false);
  if (rc.index >= data.pairs.size()) {
    throw Error("inspect: index " + std::to_string(rc.index) + " out of range (" +
                std::to_string(data.pairs.size()) + " pairs)");
  }
  const ExamplePair& ex = data.pairs[rc.index];
  std::vector<ExamplePair> one{ex};
  EmbeddingTable emb = load_table(rc, cfg.model.emb_dim, collect_tokens(one));
  Tape tape;
  const Model& frozen = model;
  ForwardResult r = forward(tape, frozen, emb, ex);
  Prediction p = make_prediction(r.probs);
  nlohmann::json j;
  j["id"] = ex.id;
  j["premise"] = inspect_sentence(ex.premise, r.premise, r.premise_attention);
  j["hypothesis"] = inspect_sentence(ex.hypothesis, r.hypothesis, r.hypothesis_attention);
  j["probs"] = {{"entailment", p.probs[0]}, {"neutral", p.probs[1]}};
  j["label"] = label_name(p.label);
  write_text(rc.output, j.dump(2) + "\n", out);
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attentive tree-LSTM entailment toolkit"};
  app.require_subcommand(1);
  Flags flags;
  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, std::ostream&);
  };
  const Sub subs[] = {
      {"train", "Train a model and write a checkpoint plus JSON log", cmd_train},
      {"eval", "Evaluate a checkpoint; JSON report and accuracy table", cmd_eval},
      {"predict", "Write JSONL predictions for unlabeled pairs", cmd_predict},
      {"gradcheck", "Finite-difference check of the full model gradient", cmd_gradcheck},
      {"inspect", "Dump attention weights for one pair as JSON", cmd_inspect},
  };
  std::vector<CLI::App*> cmds;
  for (const auto& s : subs) {
    CLI::App* c = app.add_subcommand(s.name, s.help);
    add_common(c, flags);
    cmds.push_back(c);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    if (!cmds[i]->parsed()) continue;
    RunConfig rc;
    try {
      rc = resolve(flags);
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << '\n';
      return 2;
    }
    try {
      return subs[i].fn(rc, out);
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 2;
}

}  // namespace atn
