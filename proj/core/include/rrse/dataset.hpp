#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rrse/tensor.hpp"

namespace rrse {

enum class Split { train, val, test };

std::string to_string(Split split);
Split parse_split(const std::string& text);

struct Case {
  std::string id;
  Split split = Split::train;
  Tensor image;     // [4,H,W], z-scored per channel
  LabelMap labels;  // [H,W], codes 0..3
};

struct SynthConfig {
  std::size_t cases = 50;
  std::size_t height = 96;
  std::size_t width = 96;
  std::uint64_t seed = 1;
  double noise_sigma = 1.0;

  bool operator==(const SynthConfig&) const = default;
};

inline constexpr std::size_t kImageChannels = 4;

/// Nested-ellipse cases: edema (2) outer ring, core (1), enhancing (3)
/// innermost, all concentric scaled copies of one rotated ellipse. Channel
/// intensities are class-conditional means plus Gaussian noise, then
/// z-scored per channel. Split 60/20/20 over a seeded shuffle.
std::vector<Case> generate_synthetic_cases(const SynthConfig& cfg);

// Dataset directory: dataset.json (index) plus case_XXX.image.rrse and
// case_XXX.labels.rrse per case.
void write_dataset(const std::filesystem::path& dir, const std::vector<Case>& cases,
                   const SynthConfig& cfg);
void generate_synthetic(const std::filesystem::path& dir, const SynthConfig& cfg);

struct Dataset {
  std::vector<Case> cases;

  std::vector<const Case*> split(Split s) const;
};

Dataset load_dataset(const std::filesystem::path& dir);

/// {1,2,3} -> 1 for the binary whole-tumour stage.
LabelMap fuse_labels(const LabelMap& labels);

}  // namespace rrse
