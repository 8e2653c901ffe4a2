#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegalc/checksum.hpp"
#include "eegalc/error.hpp"
#include "eegalc/features/tensor.hpp"

namespace eegalc {

// Flat tensor file: 16-byte header then row-major float64 little-endian.
//   bytes 0..2   magic "EGT"
//   byte  3      kind code (FeatureKind value; 0xFF for raw weight blobs)
//   bytes 4..15  three uint32 little-endian dims
inline constexpr char kTensorMagic[3] = {'E', 'G', 'T'};
inline constexpr std::uint8_t kWeightsKindCode = 0xFF;

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

inline std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<unsigned char>(in[at + i])} << (8 * i);
  return v;
}

inline void put_f64(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof bits);
  for (int i = 0; i < 8; ++i) out += static_cast<char>((bits >> (8 * i)) & 0xFF);
}

inline double get_f64(std::string_view in, std::size_t at) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= std::uint64_t{static_cast<unsigned char>(in[at + i])} << (8 * i);
  }
  double d;
  std::memcpy(&d, &bits, sizeof d);
  return d;
}

}  // namespace detail

struct RawTensor {
  std::uint8_t kind_code = 0;
  TensorShape shape{0, 0, 0};
  std::vector<double> data;
};

inline std::string encode_tensor(std::uint8_t kind_code, const TensorShape& shape,
                                 const std::vector<double>& data) {
  const std::size_t count = std::size_t{shape[0]} * shape[1] * shape[2];
  if (count != data.size()) fail(ErrorCode::ShapeMismatch, "tensor data does not match dims");
  std::string out(kTensorMagic, 3);
  out += static_cast<char>(kind_code);
  for (auto d : shape) detail::put_u32(out, d);
  out.reserve(16 + 8 * data.size());
  for (double v : data) detail::put_f64(out, v);
  return out;
}

inline RawTensor decode_tensor(std::string_view bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kTensorMagic, 3) != 0) {
    fail(ErrorCode::IoError, "not a tensor file");
  }
  RawTensor t;
  t.kind_code = static_cast<std::uint8_t>(bytes[3]);
  for (int i = 0; i < 3; ++i) t.shape[i] = detail::get_u32(bytes, 4 + 4 * i);
  const std::size_t count = std::size_t{t.shape[0]} * t.shape[1] * t.shape[2];
  if (bytes.size() != 16 + 8 * count) fail(ErrorCode::IoError, "tensor payload size mismatch");
  t.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) t.data[i] = detail::get_f64(bytes, 16 + 8 * i);
  return t;
}

/// Writes `<stem>.bin` and `<stem>.json` (label, provenance, dsp config hash).
inline void save_feature_tensor(const FeatureTensor& ft, const std::filesystem::path& stem,
                                const std::string& provenance, const std::string& dsp_hash) {
  const std::string bin = encode_tensor(static_cast<std::uint8_t>(ft.kind), ft.shape, ft.data);
  write_file_bytes(stem.string() + ".bin", bin);
  nlohmann::json side = {{"kind", to_string(ft.kind)},
                         {"label", to_string(ft.label)},
                         {"shape", ft.shape},
                         {"provenance", provenance},
                         {"dsp_config_hash", dsp_hash},
                         {"checksum", sha256_hex(bin)}};
  write_file_bytes(stem.string() + ".json", side.dump(2) + "\n");
}

inline FeatureTensor load_feature_tensor(const std::filesystem::path& stem) {
  const auto raw = decode_tensor(read_file_bytes(stem.string() + ".bin"));
  if (raw.kind_code > static_cast<std::uint8_t>(FeatureKind::fft)) {
    fail(ErrorCode::IoError, "tensor file does not hold a feature tensor");
  }
  const auto side = nlohmann::json::parse(read_file_bytes(stem.string() + ".json"));
  FeatureTensor ft;
  ft.kind = static_cast<FeatureKind>(raw.kind_code);
  ft.shape = raw.shape;
  ft.data = raw.data;
  ft.label = parse_group(side.at("label").get<std::string>());
  return ft;
}

}  // namespace eegalc
