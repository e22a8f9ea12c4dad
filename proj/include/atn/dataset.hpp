#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "atn/conllu.hpp"

namespace atn {

enum class Label { Entailment = 0, Neutral = 1 };
enum class Monotonicity { Upward, Downward, None };

const char* label_name(Label l);
const char* monotonicity_name(Monotonicity m);
std::optional<Monotonicity> parse_monotonicity(std::string_view tag);

struct ExamplePair {
  std::string id;
  DepTree premise;
  DepTree hypothesis;
  std::optional<Label> label;  // absent only for unlabeled prediction input
  std::optional<Monotonicity> monotonicity;
};

struct Dataset {
  std::vector<ExamplePair> pairs;
  std::size_t dropped_contradictions = 0;
};

enum class DatasetFormat { Jsonl, MedTsv };
DatasetFormat parse_dataset_format(std::string_view name);

// Column mapping for MED-style TSV files. Sentences come pre-parsed from a
// sidecar file of records "<pair id>\n<premise block>\n\n<hypothesis block>\n\n".
struct TsvColumns {
  std::string pair_id;
  std::string label;
  std::string monotonicity;  // empty: no tag column
  std::string sidecar;       // path to the CoNLL-U sidecar
};

// One object per line: premise_conllu, hypothesis_conllu, gold_label and
// optional monotonicity / id. Contradiction rows are dropped and counted.
Dataset parse_jsonl(std::string_view text, bool require_label = true);
Dataset load_jsonl(const std::string& path, bool require_label = true);
Dataset load_med_tsv(const std::string& path, const TsvColumns& columns);
Dataset load_dataset(const std::string& path, DatasetFormat format,
                     const std::optional<TsvColumns>& columns = std::nullopt,
                     bool require_label = true);

std::string read_file(const std::string& path);

}  // namespace atn
