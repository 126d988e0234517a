#pragma once

#include <string>
#include <vector>

#include "absa/encoder.hpp"
#include "absa/pipeline.hpp"
#include "absa/tokenizer.hpp"

namespace absa {

/// Every knob a command can consume, merged from three layers:
/// built-in profile ("paper" or "smoke") < JSON config file < command flags.
struct RunConfig {
  std::string profile = "paper";
  EncoderConfig encoder;    // vocab_size is filled in at run time
  TrainConfig train;
  PipelineConfig decode;
  QueryTemplates templates;
  std::string task = "triple";
  int min_freq = 1;
  std::string convert_mode = "dual";
  double valid_fraction = 0.2;
  uint64_t split_seed = 13;
  // gradcheck
  double gc_epsilon = 1e-5;
  double gc_tolerance = 1e-4;
  int gc_coords = 32;   // finite-difference probes per tensor (0 = all)
  int gc_inputs = 5;    // random inputs to sweep
  uint64_t gc_seed = 5;
  // tune-threshold
  std::string tune_side = "left";
  double grid_min = -2.0;
  double grid_max = 2.0;
  int grid_steps = 9;
};

/// Applies one named profile's baseline values.
RunConfig profile_config(const std::string& name);

/// Entry point used by main() and by tests; args exclude argv[0].
/// Returns the process exit code; never throws.
int run_cli(const std::vector<std::string>& args);

}  // namespace absa
