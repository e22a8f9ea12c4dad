#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "atn/config.hpp"
#include "atn/dataset.hpp"

namespace atn {

// Everything a subcommand may read: the training config plus file paths.
struct RunConfig {
  TrainConfig train;
  std::string train_path, dev_path, test_path;
  std::string train_format = "jsonl", dev_format = "jsonl", test_format = "jsonl";
  std::string train_conllu, dev_conllu, test_conllu;  // med-tsv sidecars
  std::string tsv_pair_id_column = "pairID";
  std::string tsv_label_column = "gold_label";
  std::string tsv_monotonicity_column;
  std::string embeddings;
  std::uint64_t oov_seed = 0;
  std::string checkpoint_out, checkpoint_in;
  std::string report_out, log_out;
  std::string input, output;
  int threads = 1;
  std::size_t index = 0;  // inspect: which input pair

  static const std::vector<std::string>& path_keys();
  void apply_json(const nlohmann::json& j);
  std::optional<TsvColumns> columns_for(const std::string& format, const std::string& sidecar) const;
};

// Subcommands: train | eval | predict | gradcheck | inspect.
// Exit codes: 0 success, 1 runtime failure, 2 invalid configuration.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace atn
