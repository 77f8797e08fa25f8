#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "spinn/model.hpp"
#include "spinn/trainer.hpp"

namespace spinn {

// Binary model snapshot: magic "SPNN", format version, model shape, the flat
// little-endian f64 parameter array, optional optimizer state, and the step
// index. load(save(model)) reproduces the parameters bit for bit.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path,
                     const SeparableModel& model,
                     const AdamState* opt = nullptr, std::uint64_t step = 0);

struct LoadedCheckpoint {
  SeparableModel model;
  std::optional<AdamState> opt;
  std::uint64_t step = 0;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace spinn
