#include "atn/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "atn/error.hpp"

namespace atn {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

enum class RawLabel { Entailment, Neutral, Contradiction, Unknown };

RawLabel classify_label(std::string_view raw) {
  std::string s = lower(raw);
  if (s == "entailment") return RawLabel::Entailment;
  if (s == "neutral" || s == "non-entailment" || s == "non_entailment") return RawLabel::Neutral;
  if (s == "contradiction" || s == "contradict") return RawLabel::Contradiction;
  return RawLabel::Unknown;
}

std::string where(const std::string& source, std::size_t lineno) {
  return source + " line " + std::to_string(lineno);
}

DepTree parse_tree_at(const std::string& text, const std::string& loc, const char* field) {
  try {
    return parse_conllu(text);
  } catch (const ParseError& e) {
    throw ParseError(loc + ": unparsable " + field + ": " + e.what());
  }
}

Dataset parse_jsonl_impl(std::string_view text, bool require_label, const std::string& source) {
  Dataset out;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    std::string loc = where(source, lineno);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(loc + ": invalid JSON: " + e.what());
    }
    if (!obj.is_object()) throw ParseError(loc + ": expected a JSON object");
    auto str_field = [&](const char* key, bool required) -> std::optional<std::string> {
      auto it = obj.find(key);
      if (it == obj.end() || it->is_null()) {
        if (required) throw ParseError(loc + ": missing required field '" + key + "'");
        return std::nullopt;
      }
      if (!it->is_string()) throw ParseError(loc + ": field '" + key + "' must be a string");
      return it->get<std::string>();
    };
    auto premise = str_field("premise_conllu", true);
    auto hypothesis = str_field("hypothesis_conllu", true);
    auto gold = str_field("gold_label", require_label);
    auto mono = str_field("monotonicity", false);
    auto id = str_field("id", false);

    ExamplePair ex;
    if (gold) {
      RawLabel l = classify_label(*gold);
      if (l == RawLabel::Contradiction) {
        ++out.dropped_contradictions;
        continue;
      }
      if (l == RawLabel::Unknown) throw ParseError(loc + ": unknown gold_label '" + *gold + "'");
      ex.label = l == RawLabel::Entailment ? Label::Entailment : Label::Neutral;
    }
    ex.premise = parse_tree_at(*premise, loc, "premise_conllu");
    ex.hypothesis = parse_tree_at(*hypothesis, loc, "hypothesis_conllu");
    if (mono && !mono->empty()) {
      ex.monotonicity = parse_monotonicity(*mono);
      if (!ex.monotonicity) throw ParseError(loc + ": unknown monotonicity tag '" + *mono + "'");
    }
    ex.id = id ? *id : source + ":" + std::to_string(lineno);
    out.pairs.push_back(std::move(ex));
  }
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, '\t')) out.push_back(cell);
  if (!line.empty() && line.back() == '\t') out.emplace_back();
  return out;
}

struct SidecarEntry {
  std::string premise;
  std::string hypothesis;
};

std::map<std::string, SidecarEntry> read_sidecar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read CoNLL-U sidecar '" + path + "'");
  std::map<std::string, SidecarEntry> out;
  enum class State { Key, Premise, Hypothesis } state = State::Key;
  std::string key;
  SidecarEntry cur;
  std::string line;
  std::size_t lineno = 0;
  auto is_blank = [](const std::string& s) { return s.find_first_not_of(" \t\r") == std::string::npos; };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    switch (state) {
      case State::Key:
        if (is_blank(line)) break;
        key = line;
        cur = {};
        state = State::Premise;
        break;
      case State::Premise:
        if (is_blank(line)) {
          if (!cur.premise.empty()) state = State::Hypothesis;
        } else {
          cur.premise += line + "\n";
        }
        break;
      case State::Hypothesis:
        if (is_blank(line)) {
          if (!cur.hypothesis.empty()) {
            if (out.count(key)) throw ParseError(where(path, lineno) + ": duplicate pair id '" + key + "'");
            out[key] = std::move(cur);
            state = State::Key;
          }
        } else {
          cur.hypothesis += line + "\n";
        }
        break;
    }
  }
  if (state == State::Hypothesis && !cur.hypothesis.empty()) {
    out[key] = std::move(cur);
  } else if (state != State::Key) {
    throw ParseError(path + ": record '" + key + "' is missing its hypothesis block");
  }
  return out;
}

}  // namespace

const char* label_name(Label l) { return l == Label::Entailment ? "entailment" : "neutral"; }

const char* monotonicity_name(Monotonicity m) {
  switch (m) {
    case Monotonicity::Upward: return "upward";
    case Monotonicity::Downward: return "downward";
    case Monotonicity::None: return "none";
  }
  return "none";
}

std::optional<Monotonicity> parse_monotonicity(std::string_view tag) {
  std::string s = lower(tag);
  if (s.find("downward") != std::string::npos) return Monotonicity::Downward;
  if (s.find("upward") != std::string::npos) return Monotonicity::Upward;
  if (s == "none" || s == "non" || s == "non_monotone" || s == "non-monotone" || s == "nonmonotone")
    return Monotonicity::None;
  return std::nullopt;
}

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "jsonl") return DatasetFormat::Jsonl;
  if (name == "med-tsv") return DatasetFormat::MedTsv;
  throw ConfigError("unknown dataset format '" + std::string(name) + "' (expected jsonl or med-tsv)");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset parse_jsonl(std::string_view text, bool require_label) {
  return parse_jsonl_impl(text, require_label, "jsonl");
}

Dataset load_jsonl(const std::string& path, bool require_label) {
  return parse_jsonl_impl(read_file(path), require_label, path);
}

Dataset load_med_tsv(const std::string& path, const TsvColumns& columns) {
  if (columns.pair_id.empty() || columns.label.empty() || columns.sidecar.empty()) {
    throw ConfigError("med-tsv needs pair id column, label column and sidecar path");
  }
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read '" + path + "'");
  auto sidecar = read_sidecar(columns.sidecar);

  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_tabs(line);
  auto col = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(path + ": header has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::size_t id_col = col(columns.pair_id);
  std::size_t label_col = col(columns.label);
  std::optional<std::size_t> mono_col;
  if (!columns.monotonicity.empty()) mono_col = col(columns.monotonicity);

  Dataset out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string loc = where(path, lineno);
    auto cells = split_tabs(line);
    auto cell = [&](std::size_t i, const std::string& name) -> const std::string& {
      if (i >= cells.size() || cells[i].empty()) throw ParseError(loc + ": missing required field '" + name + "'");
      return cells[i];
    };
    const std::string& pid = cell(id_col, columns.pair_id);
    const std::string& gold = cell(label_col, columns.label);
    RawLabel l = classify_label(gold);
    if (l == RawLabel::Contradiction) {
      ++out.dropped_contradictions;
      continue;
    }
    if (l == RawLabel::Unknown) throw ParseError(loc + ": unknown gold label '" + gold + "'");
    auto it = sidecar.find(pid);
    if (it == sidecar.end()) throw ParseError(loc + ": pair id '" + pid + "' not in sidecar");

    ExamplePair ex;
    ex.id = pid;
    ex.label = l == RawLabel::Entailment ? Label::Entailment : Label::Neutral;
    ex.premise = parse_tree_at(it->second.premise, loc, "premise tree");
    ex.hypothesis = parse_tree_at(it->second.hypothesis, loc, "hypothesis tree");
    if (mono_col && *mono_col < cells.size() && !cells[*mono_col].empty()) {
      ex.monotonicity = parse_monotonicity(cells[*mono_col]);
      if (!ex.monotonicity) throw ParseError(loc + ": unknown monotonicity tag '" + cells[*mono_col] + "'");
    }
    out.pairs.push_back(std::move(ex));
  }
  return out;
}

Dataset load_dataset(const std::string& path, DatasetFormat format,
                     const std::optional<TsvColumns>& columns, bool require_label) {
  if (format == DatasetFormat::Jsonl) return load_jsonl(path, require_label);
  if (!columns) throw ConfigError("med-tsv format requires a column mapping");
  return load_med_tsv(path, *columns);
}

}  // namespace atn
