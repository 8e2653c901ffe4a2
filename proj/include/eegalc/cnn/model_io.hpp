#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "eegalc/checksum.hpp"
#include "eegalc/cnn/network.hpp"
#include "eegalc/features/tensor_io.hpp"

namespace eegalc::cnn {

inline constexpr int kCnnFormatVersion = 1;

inline nlohmann::json model_manifest(const CnnModel& m, const std::string& weights_file,
                                     const std::string& weights_checksum) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& s : m.specs()) layers.push_back(to_json(s));
  const auto& in = m.input_shape();
  return {{"format", "eegalc-cnn"},
          {"version", kCnnFormatVersion},
          {"input_shape", {in.c, in.h, in.w}},
          {"seed", m.seed()},
          {"layers", layers},
          {"param_count", m.param_count()},
          {"weights_file", weights_file},
          {"weights_checksum", weights_checksum}};
}

inline std::string encode_weights(const CnnModel& m) {
  const auto w = m.flat_weights();
  return encode_tensor(kWeightsKindCode, {1, 1, static_cast<std::uint32_t>(w.size())}, w);
}

/// Writes `<stem>.json` (manifest) and `<stem>.weights.bin`.
inline void save_model(const CnnModel& m, const std::filesystem::path& stem) {
  const std::string bin = encode_weights(m);
  const std::string wfile = stem.filename().string() + ".weights.bin";
  write_file_bytes(stem.string() + ".weights.bin", bin);
  write_file_bytes(stem.string() + ".json", model_manifest(m, wfile, sha256_hex(bin)).dump(2) + "\n");
}

inline CnnModel load_model(const std::filesystem::path& stem) {
  const auto j = nlohmann::json::parse(read_file_bytes(stem.string() + ".json"));
  if (j.value("format", std::string()) != "eegalc-cnn" || j.value("version", 0) != kCnnFormatVersion) {
    fail(ErrorCode::IoError, "not a version-1 CNN manifest");
  }
  const auto in = j.at("input_shape");
  std::vector<LayerSpec> specs;
  for (const auto& l : j.at("layers")) specs.push_back(layer_spec_from_json(l));
  CnnModel m({in.at(0).get<std::size_t>(), in.at(1).get<std::size_t>(), in.at(2).get<std::size_t>()},
             std::move(specs), j.at("seed").get<std::uint64_t>());
  const auto dir = stem.parent_path();
  const std::string bin = read_file_bytes(dir / j.at("weights_file").get<std::string>());
  if (sha256_hex(bin) != j.at("weights_checksum").get<std::string>()) {
    fail(ErrorCode::IoError, "weights checksum mismatch");
  }
  const auto raw = decode_tensor(bin);
  if (raw.kind_code != kWeightsKindCode) fail(ErrorCode::IoError, "not a weights file");
  m.set_flat_weights(raw.data);
  return m;
}

}  // namespace eegalc::cnn
