#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace opsurv::cli {

/// Merged view of model + training settings and file paths. Values come
/// from defaults, then an optional config file, then command-line flags.
struct RunConfig {
  std::string data_path;
  std::string model_path;
  std::string out_path;
  std::string loss_log_path;

  int n_events = 1;
  int max_degree = 8;
  int quad_order = 20;
  std::vector<int> hidden_sizes = {32, 32};

  int epochs = 100;
  int batch_size = 200;
  double learning_rate = 1e-3;
  double likelihood_weight = 1.0;
  double ranking_weight = 1.0;
  std::uint64_t seed = 0;
};

/// Parses `key = value` lines ('#' starts a comment). Unknown keys are
/// rejected so typos cannot silently fall back to defaults.
void apply_config_file(RunConfig& config, const std::string& path);

std::vector<int> parse_int_list(const std::string& text);

}  // namespace opsurv::cli
