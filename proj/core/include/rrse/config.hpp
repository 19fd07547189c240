#pragma once

#include <optional>
#include <string>

#include "rrse/dataset.hpp"
#include "rrse/network.hpp"
#include "rrse/training.hpp"

namespace rrse {

enum class Variant { baseline, recomb, rr_se, rr_segse, baseline_wide, binary };

std::string to_string(Variant v);
Variant parse_variant(const std::string& text);

/// The five multi-class variants compared side by side, in report order.
inline constexpr Variant kCompareVariants[] = {Variant::baseline, Variant::recomb, Variant::rr_se,
                                               Variant::rr_segse, Variant::baseline_wide};

/// Applies a variant to a base spec (whose own recombination / rr_mode /
/// width_multiplier are overridden). baseline_wide scales the baseline
/// width until its parameter count is within 5% of rr_segse; binary is the
/// baseline with two classes.
NetworkSpec variant_spec(const NetworkSpec& base, Variant v);

struct ExperimentConfig {
  std::string dataset;            // dataset directory
  std::string out;                // output directory
  std::string variant = "baseline";
  NetworkSpec network;
  TrainConfig train;
  std::optional<SynthConfig> synth;  // generate `dataset` when it has no dataset.json

  bool operator==(const ExperimentConfig&) const = default;
};

/// Strict JSON: unknown keys and wrong types are errors. Relative paths are
/// kept as written.
ExperimentConfig parse_experiment_config(const std::string& text, const std::string& context);
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

}  // namespace rrse
