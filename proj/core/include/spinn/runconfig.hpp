#pragma once

#include <filesystem>
#include <string>

#include "spinn/net.hpp"
#include "spinn/trainer.hpp"

namespace spinn {

// Parsed experiment configuration. The file format is flat sectioned text:
//
//   problem = helmholtz3d      # top-level keys before any section
//   seed = 7
//   out = runs/helm
//   [model]
//   rank = 32
//   depth = 4
//   width = 64
//   variant = plain            # or: modified
//   [train]
//   iterations = 50000
//   lr = 0.001
//   points = 32                # or per axis: 32,32,32
//   resample_interval = 100
//   log_interval = 100
//   eval_interval = 1000
//   checkpoint_interval = 0
//   bc_points = 32             # optional, defaults to points
//   [eval]
//   resolution = 101           # 0 = problem default
//
// Unknown keys and sections are rejected with the offending line number.
struct RunConfig {
  std::string problem;
  std::uint64_t seed = 0;
  std::string out_dir;

  int rank = 32;
  int depth = 4;
  int width = 64;
  MlpVariant variant = MlpVariant::plain;

  TrainConfig train;
  int eval_resolution = 0;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace spinn
