#include "atn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "atn/error.hpp"

namespace atn {

namespace {

constexpr char kMagic[4] = {'A', 'T', 'N', 'C'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kDtypeF64 = 0;

class Writer {
 public:
  template <typename T>
  void uint(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const std::string& s) { out_ += s; }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}

  template <typename T>
  T uint() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (n > data_.size() - pos_) {
      throw CheckpointError("unexpected end at offset " + std::to_string(data_.size()));
    }
  }
  const std::string& data_;
  std::size_t pos_ = 0;
};

void write_tensor(Writer& w, const std::string& name, const Tensor& t) {
  if (name.size() > 0xffff) throw CheckpointError("tensor name too long: " + name);
  w.uint<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
  w.bytes(name);
  w.uint<std::uint8_t>(kDtypeF64);
  w.uint<std::uint8_t>(static_cast<std::uint8_t>(t.rank()));
  for (auto d : t.dims()) w.uint<std::uint64_t>(d);
  for (double v : t.value()) w.f64(v);
}

}  // namespace

std::string encode_checkpoint(const ParamStore& params, const AdamState& adam,
                              const nlohmann::json& config) {
  std::vector<std::pair<std::string, Tensor>> extra;
  for (const auto& name : params.names()) {
    const Tensor& t = params.at(name);
    auto moment = [&](const std::map<std::string, std::vector<double>>& src) {
      auto it = src.find(name);
      std::vector<double> data = it != src.end() ? it->second : std::vector<double>(t.size(), 0.0);
      return Tensor(t.dims(), std::move(data));
    };
    extra.emplace_back("adam.m/" + name, moment(adam.m));
    extra.emplace_back("adam.v/" + name, moment(adam.v));
  }
  extra.emplace_back("adam.t", Tensor::scalar(static_cast<double>(adam.t)));

  Writer w;
  w.bytes(std::string(kMagic, 4));
  w.uint<std::uint32_t>(kVersion);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(params.size() + extra.size()));
  for (const auto& name : params.names()) write_tensor(w, name, params.at(name));
  for (const auto& [name, t] : extra) write_tensor(w, name, t);
  std::string blob = config.dump();
  w.uint<std::uint64_t>(blob.size());
  w.bytes(blob);
  return w.take();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  std::string magic = r.bytes(4);
  if (magic != std::string(kMagic, 4)) throw CheckpointError("bad magic at offset 0");
  std::size_t at = r.offset();
  std::uint32_t version = r.uint<std::uint32_t>();
  if (version != kVersion) {
    throw CheckpointError("unsupported version " + std::to_string(version) + " at offset " + std::to_string(at));
  }
  std::uint32_t count = r.uint<std::uint32_t>();
  Checkpoint ck;
  for (std::uint32_t k = 0; k < count; ++k) {
    std::uint16_t len = r.uint<std::uint16_t>();
    std::string name = r.bytes(len);
    at = r.offset();
    std::uint8_t dtype = r.uint<std::uint8_t>();
    if (dtype != kDtypeF64) {
      throw CheckpointError("tensor '" + name + "': unknown dtype " + std::to_string(dtype) +
                            " at offset " + std::to_string(at));
    }
    at = r.offset();
    std::uint8_t rank = r.uint<std::uint8_t>();
    if (rank > 2) {
      throw CheckpointError("tensor '" + name + "': rank " + std::to_string(rank) + " at offset " +
                            std::to_string(at));
    }
    Dims dims(rank);
    for (auto& d : dims) d = r.uint<std::uint64_t>();
    std::size_t n = dims_size(dims);
    if (n > r.remaining() / 8) throw CheckpointError("unexpected end at offset " + std::to_string(bytes.size()));
    std::vector<double> data(n);
    for (double& v : data) v = r.f64();
    Tensor t(std::move(dims), std::move(data));
    if (name == "adam.t") {
      ck.adam.t = static_cast<std::uint64_t>(t.item());
    } else if (name.rfind("adam.m/", 0) == 0) {
      ck.adam.m[name.substr(7)] = t.data();
    } else if (name.rfind("adam.v/", 0) == 0) {
      ck.adam.v[name.substr(7)] = t.data();
    } else {
      t.set_requires_grad(true);
      ck.params.add(name, std::move(t));
    }
  }
  std::uint64_t cfg_len = r.uint<std::uint64_t>();
  at = r.offset();
  std::string blob = r.bytes(static_cast<std::size_t>(cfg_len));
  try {
    ck.config = nlohmann::json::parse(blob);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("invalid config JSON at offset " + std::to_string(at) + ": " + e.what());
  }
  if (!r.done()) throw CheckpointError("trailing bytes at offset " + std::to_string(r.offset()));
  return ck;
}

void save_checkpoint(const std::string& path, const ParamStore& params, const AdamState& adam,
                     const nlohmann::json& config) {
  std::string bytes = encode_checkpoint(params, adam, config);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

void restore_params(ParamStore& target, const ParamStore& loaded) {
  std::vector<std::string> problems;
  for (const auto& name : target.names()) {
    if (!loaded.contains(name)) {
      problems.push_back(name + " (missing)");
    } else if (loaded.at(name).dims() != target.at(name).dims()) {
      problems.push_back(name + " (expected " + dims_str(target.at(name).dims()) + ", got " +
                         dims_str(loaded.at(name).dims()) + ")");
    }
  }
  for (const auto& name : loaded.names()) {
    if (!target.contains(name)) problems.push_back(name + " (unexpected)");
  }
  if (!problems.empty()) {
    std::string msg = "checkpoint tensors do not match the model:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw CheckpointError(msg);
  }
  for (const auto& name : target.names()) target.at(name).data() = loaded.at(name).data();
}

Model model_from_checkpoint(const Checkpoint& ckpt) {
  TrainConfig cfg = train_config_from_json(ckpt.config);
  Model model(cfg.model, cfg.seed);
  if (cfg.model.trainable_embeddings) {
    for (const auto& name : ckpt.params.names()) {
      if (name.rfind("emb/", 0) == 0 && !model.params().contains(name)) {
        model.params().add(name, Tensor(ckpt.params.at(name).dims(), true));
      }
    }
  }
  restore_params(model.params(), ckpt.params);
  return model;
}

}  // namespace atn
