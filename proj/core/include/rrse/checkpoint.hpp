#pragma once

#include <cstdint>
#include <filesystem>

#include "rrse/network.hpp"

namespace rrse {

/// Training progress stored next to the weights. The sampling RNG of
/// iteration i is derived from (seed, i), so (seed, step) is the full RNG state.
struct TrainingState {
  std::uint64_t seed = 0;
  std::size_t step = 0;

  bool operator==(const TrainingState&) const = default;
};

// Layout of a checkpoint directory:
//   spec.json        format, format_version, network spec, step, rng, parameter list
//   <name>.rrse      one f32 tensor per parameter, e.g. scale0.conv0.weight.rrse
void save_checkpoint(const std::filesystem::path& dir, const Model& model,
                     const TrainingState& state);

struct LoadedCheckpoint {
  Model model;
  TrainingState state;
};

/// Rebuilds the model from spec.json and loads every listed tensor. Missing,
/// extra or mis-shaped parameters are errors.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace rrse
