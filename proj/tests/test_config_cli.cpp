#include <gtest/gtest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "atn/checkpoint.hpp"
#include "atn/cli.hpp"
#include "atn/config.hpp"
#include "atn/error.hpp"
#include "support.hpp"
#include "synthetic.hpp"

namespace atn {
namespace {

using testing::TempDir;

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "atn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

TEST(Config, JsonRoundTrip) {
  TrainConfig c;
  c.lr = 0.02;
  c.epochs = 7;
  c.seed = 99;
  c.model.hidden_dim = 11;
  c.model.encoder = EncoderMode::Sequential;
  c.model.match = MatchScheme::MeanDist;
  c.model.second_activation = Activation::Relu;
  c.model.trainable_embeddings = true;
  TrainConfig back = train_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.model.encoder, EncoderMode::Sequential);
  EXPECT_EQ(back.seed, 99u);
}

TEST(Config, Defaults) {
  TrainConfig c;
  EXPECT_EQ(c.lr, 0.001);
  EXPECT_EQ(c.batch_size, 32);
  EXPECT_EQ(c.dropout, 0.5);
  EXPECT_EQ(c.model.hidden_dim, 150u);
  EXPECT_EQ(c.model.emb_dim, 300u);
  EXPECT_EQ(c.model.hops, 15u);
  EXPECT_EQ(c.model.mlp_hidden1, 200u);
  EXPECT_EQ(c.model.mlp_hidden2, 100u);
}

TEST(Config, Rejections) {
  try {
    train_config_from_json({{"learning_rate", 0.1}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("learning_rate"), std::string::npos);
  }
  EXPECT_THROW(train_config_from_json({{"lr", "fast"}}), ConfigError);
  EXPECT_THROW(train_config_from_json({{"hops", -1}}), ConfigError);
  EXPECT_THROW(train_config_from_json({{"encoder", "cnn"}}), ConfigError);
  EXPECT_THROW(train_config_from_json({{"dropout", 1.0}}), ConfigError);
  EXPECT_THROW(train_config_from_json({{"hidden_dim", 0}}), ConfigError);
  EXPECT_THROW(train_config_from_json(nlohmann::json::array()), ConfigError);

  RunConfig rc;
  rc.apply_json({{"train", "a.jsonl"}, {"lr", 0.5}, {"threads", 2}});
  EXPECT_EQ(rc.train_path, "a.jsonl");
  EXPECT_EQ(rc.train.lr, 0.5);
  EXPECT_EQ(rc.threads, 2);
  EXPECT_THROW(rc.apply_json({{"trian", "a.jsonl"}}), ConfigError);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({"train", "--help"}).code, 0);

  CliResult r = cli({"train", "--train", "x.jsonl"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--embeddings"), std::string::npos) << r.err;

  r = cli({"train", "--train", "x.jsonl", "--embeddings", "e.txt", "--checkpoint-out", "m", "--lr", "-1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("lr"), std::string::npos) << r.err;

  r = cli({"train", "--encoder", "rnn"});
  EXPECT_EQ(r.code, 2);

  TempDir dir;
  auto cfg = dir.write("c.json", "{\"nope\": 1}");
  r = cli({"eval", "--config", cfg});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nope"), std::string::npos) << r.err;

  // Missing files are runtime failures, not configuration errors.
  r = cli({"eval", "--checkpoint", dir.file("none.ckpt"), "--test", dir.file("t.jsonl"), "--embeddings",
           dir.file("e.txt")});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, GradcheckPasses) {
  CliResult r = cli({"gradcheck"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("max relative error"), std::string::npos);
}

class CliPipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    corpus_ = testing::make_synthetic_corpus(11, 20, 8);
    train_ = dir_.write("train.jsonl", testing::to_jsonl(corpus_.train));
    dev_ = dir_.write("dev.jsonl", testing::to_jsonl(corpus_.heldout));
    std::vector<ExamplePair> all = corpus_.train;
    all.insert(all.end(), corpus_.heldout.begin(), corpus_.heldout.end());
    emb_ = dir_.write("emb.txt", testing::embeddings_text(corpus_.embeddings, all));
    TrainConfig c;
    c.epochs = 3;
    c.batch_size = 8;
    c.model = testing::synthetic_model_config(EncoderMode::AttentiveTree);
    c.model.hops = 2;
    config_ = dir_.write("config.json", to_json(c).dump());
  }

  CliResult train_model(const std::string& ckpt) {
    return cli({"train", "--config", config_, "--train", train_, "--dev", dev_, "--embeddings", emb_,
                "--checkpoint-out", ckpt});
  }

  TempDir dir_;
  testing::SyntheticCorpus corpus_;
  std::string train_, dev_, emb_, config_;
};

TEST_F(CliPipeline, TrainEvalPredictInspect) {
  std::string ckpt = dir_.file("m.ckpt");
  CliResult r = train_model(ckpt);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("epoch 3"), std::string::npos) << r.out;

  auto log = nlohmann::json::parse(read_file(ckpt + ".log.json"));
  EXPECT_EQ(log["epochs"].size(), 3u);
  EXPECT_EQ(log["train_pairs"], 20);
  EXPECT_TRUE(log.contains("timestamp"));

  // Four pairs, one of them a contradiction that must be dropped.
  std::vector<ExamplePair> four(corpus_.heldout.begin(), corpus_.heldout.begin() + 3);
  std::string lines = testing::to_jsonl(four);
  nlohmann::json contra = nlohmann::json::parse(testing::to_jsonl({corpus_.heldout[3]}));
  contra["gold_label"] = "contradiction";
  std::string test = dir_.write("test.jsonl", lines + contra.dump() + "\n");
  std::string report = dir_.file("report.json");
  r = cli({"eval", "--checkpoint", ckpt, "--test", test, "--embeddings", emb_, "--report-out", report});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rep = nlohmann::json::parse(read_file(report));
  EXPECT_EQ(rep["n"]["all"], 3);
  EXPECT_EQ(rep["dropped_contradictions"], 1);
  EXPECT_NE(r.out.find("Upward"), std::string::npos);
  EXPECT_NE(r.out.find("Downward"), std::string::npos);

  std::vector<ExamplePair> unlabeled = four;
  for (auto& p : unlabeled) p.label.reset();
  std::string input = dir_.write("in.jsonl", testing::to_jsonl(unlabeled));
  std::string preds = dir_.file("preds.jsonl");
  r = cli({"predict", "--checkpoint", ckpt, "--input", input, "--embeddings", emb_, "--output", preds});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream ps(read_file(preds));
  std::string line;
  int n = 0;
  while (std::getline(ps, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["id"], four[n].id);
    double e = j["probs"]["entailment"], u = j["probs"]["neutral"];
    EXPECT_NEAR(e + u, 1.0, 1e-9);
    EXPECT_EQ(j["label"], e >= u ? "entailment" : "neutral");
    EXPECT_EQ(j["confidence"], std::max(e, u));
    ++n;
  }
  EXPECT_EQ(n, 3);

  r = cli({"inspect", "--checkpoint", ckpt, "--input", input, "--embeddings", emb_, "--index", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["id"], four[1].id);
  EXPECT_EQ(j["premise"]["tokens"].size(), 3u);
  for (const char* side : {"premise", "hypothesis"}) {
    for (const auto& node : j[side]["alpha"]) {
      double s = 0;
      for (const auto& c : node["children"]) s += c["alpha"].get<double>();
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
    EXPECT_EQ(j[side]["A"].size(), 2u);
  }
  r = cli({"inspect", "--checkpoint", ckpt, "--input", input, "--embeddings", emb_, "--index", "9"});
  EXPECT_EQ(r.code, 1);
}

TEST_F(CliPipeline, ArtifactsAreDeterministic) {
  std::string ckpt = dir_.file("m.ckpt");
  ASSERT_EQ(train_model(ckpt).code, 0);
  std::string bytes1 = read_file(ckpt);
  auto log1 = nlohmann::json::parse(read_file(ckpt + ".log.json"));
  ASSERT_EQ(train_model(ckpt).code, 0);
  EXPECT_EQ(read_file(ckpt), bytes1);
  auto log2 = nlohmann::json::parse(read_file(ckpt + ".log.json"));
  log1.erase("timestamp");
  log2.erase("timestamp");
  EXPECT_EQ(log1, log2);

  // A flag beats the config file.
  std::string other = dir_.file("o.ckpt");
  CliResult r = cli({"train", "--config", config_, "--train", train_, "--embeddings", emb_,
                     "--checkpoint-out", other, "--epochs", "1", "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  Checkpoint ck = load_checkpoint(other);
  EXPECT_EQ(ck.config["epochs"], 1);
  EXPECT_EQ(ck.config["seed"], 5);
  EXPECT_EQ(ck.config["hidden_dim"], 16);
}

}  // namespace
}  // namespace atn
