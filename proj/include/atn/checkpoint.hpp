#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "atn/params.hpp"
#include "atn/trainer.hpp"

namespace atn {

// Binary layout, little-endian throughout:
//   "ATNC" | u32 version (1) | u32 tensor count
//   per tensor: u16 name length | name | u8 dtype (0 = f64) | u8 rank |
//               rank x u64 dims | f64 payload
//   u64 config length | UTF-8 JSON config
// Adam moments are stored as tensors "adam.m/<name>" and "adam.v/<name>",
// the step counter as the scalar "adam.t".
struct Checkpoint {
  ParamStore params;
  AdamState adam;
  nlohmann::json config;
};

void save_checkpoint(const std::string& path, const ParamStore& params, const AdamState& adam,
                     const nlohmann::json& config);
Checkpoint load_checkpoint(const std::string& path);
std::string encode_checkpoint(const ParamStore& params, const AdamState& adam,
                              const nlohmann::json& config);
Checkpoint decode_checkpoint(const std::string& bytes);

// Copies checkpoint tensors into `target`, which fixes the expected names
// and shapes. Throws listing every missing, extra or mis-shaped tensor.
void restore_params(ParamStore& target, const ParamStore& loaded);

// Rebuilds a model from the checkpoint config and tensors.
Model model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace atn
