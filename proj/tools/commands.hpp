#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace opsurv::cli {

int cmd_train(const RunConfig& config);
int cmd_evaluate(const std::string& model_path, const std::string& data_path,
                 const std::string& out_path, int ibs_grid_points);
int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::vector<double>& raw_times,
                const std::string& out_path);
int cmd_curves(const std::string& model_path, const std::string& data_path,
               int grid_points, const std::string& out_path);
int cmd_gradcheck(std::uint64_t seed, int n_seeds, bool corrupt);
int cmd_synth(int n, int n_features, int n_events, double censor_rate,
              std::uint64_t seed, const std::string& out_path);

}  // namespace opsurv::cli
