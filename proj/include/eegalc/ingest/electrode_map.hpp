#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "eegalc/error.hpp"

namespace eegalc {

inline constexpr std::size_t kChannels = 64;
inline constexpr std::size_t kSamples = 256;
inline constexpr double kSampleRate = 256.0;

/// Dataset electrode order. Index 1..64 maps to the montage label; index 63
/// ("nd") is kept verbatim even though it is not a 10-20 position.
class ElectrodeMap {
 public:
  static const ElectrodeMap& standard() {
    static const ElectrodeMap map;
    return map;
  }

  std::size_t size() const noexcept { return kNames.size(); }

  /// 1-based lookup.
  std::string_view name(std::size_t index) const {
    if (index < 1 || index > kNames.size()) {
      fail(ErrorCode::IndexOutOfRange, "electrode index " + std::to_string(index));
    }
    return kNames[index - 1];
  }

  /// 1-based index for a label. Case-insensitive; "FZ" (the label used in the
  /// raw recordings) is accepted for position 7.
  std::optional<std::size_t> index(std::string_view label) const {
    const std::string up = upper(label);
    for (std::size_t i = 0; i < kNames.size(); ++i) {
      if (upper(kNames[i]) == up) return i + 1;
    }
    if (up == "FZ") return 7;
    return std::nullopt;
  }

  std::size_t index_or_throw(std::string_view label) const {
    auto idx = index(label);
    if (!idx) fail(ErrorCode::UnknownElectrode, std::string(label));
    return *idx;
  }

 private:
  static std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
  }

  static constexpr std::array<std::string_view, kChannels> kNames = {
      "FP1", "FP2", "F7",  "F8",  "AF1", "AF2", "FZ1", "F4",  "F3",  "FC6", "FC5",
      "FC2", "FC1", "T8",  "T7",  "CZ",  "C3",  "C4",  "CP5", "CP6", "CP1", "CP2",
      "P3",  "P4",  "PZ",  "P8",  "P7",  "PO2", "PO1", "O2",  "O1",  "X",   "AF7",
      "AF8", "F5",  "F6",  "FT7", "FT8", "FPZ", "FC4", "FC3", "C6",  "C5",  "F2",
      "F1",  "TP8", "TP7", "AFZ", "CP3", "CP4", "P5",  "P6",  "C1",  "C2",  "PO7",
      "PO8", "FCZ", "POZ", "OZ",  "P2",  "P1",  "CPZ", "nd",  "Y"};
};

inline std::string_view electrode_name(std::size_t index) {
  return ElectrodeMap::standard().name(index);
}

}  // namespace eegalc
