#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "eegalc/checksum.hpp"
#include "eegalc/dsp/bands.hpp"
#include "eegalc/dsp/morlet.hpp"
#include "eegalc/dsp/pca.hpp"

namespace eegalc {

/// Preprocessing knobs shared by the feature builders.
struct DspConfig {
  MorletParams morlet;
  BandMethod band_method = BandMethod::fft_mask;
  std::optional<RemovalPolicy> pca;  // none: no artifact removal
};

inline nlohmann::json to_json(const RemovalPolicy& p) {
  if (const auto* k = std::get_if<DropTopK>(&p)) return {{"policy", "drop_top_k"}, {"k", k->k}};
  const auto& f = std::get<FrontalLoading>(p);
  return {{"policy", "frontal_loading"}, {"threshold", f.threshold}, {"electrodes", f.electrodes}};
}

inline std::optional<RemovalPolicy> removal_policy_from_json(const nlohmann::json& j) {
  const std::string policy = j.value("policy", std::string("none"));
  if (policy == "none") return std::nullopt;
  if (policy == "drop_top_k") return DropTopK{j.value("k", 1)};
  if (policy == "frontal_loading") {
    FrontalLoading f;
    f.threshold = j.value("threshold", f.threshold);
    if (j.contains("electrodes")) f.electrodes = j.at("electrodes").get<std::vector<std::string>>();
    return f;
  }
  fail(ErrorCode::ConfigError, "unknown pca policy '" + policy + "'");
}

inline nlohmann::json to_json(const DspConfig& c) {
  return {{"morlet", {{"omega0", c.morlet.omega0}, {"sigma", c.morlet.sigma}}},
          {"band_method", to_string(c.band_method)},
          {"pca", c.pca ? to_json(*c.pca) : nlohmann::json{{"policy", "none"}}}};
}

inline DspConfig dsp_config_from_json(const nlohmann::json& j) {
  DspConfig c;
  if (j.contains("morlet")) {
    c.morlet.omega0 = j["morlet"].value("omega0", c.morlet.omega0);
    c.morlet.sigma = j["morlet"].value("sigma", c.morlet.sigma);
    c.morlet.validate();
  }
  if (j.contains("band_method")) c.band_method = parse_band_method(j["band_method"].get<std::string>());
  if (j.contains("pca")) c.pca = removal_policy_from_json(j["pca"]);
  return c;
}

inline std::string config_hash(const DspConfig& c) { return sha256_hex(to_json(c).dump()); }

}  // namespace eegalc
