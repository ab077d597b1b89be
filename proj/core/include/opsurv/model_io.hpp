#pragma once

#include <string>

#include "opsurv/data.hpp"
#include "opsurv/model.hpp"

namespace opsurv {

/// Everything needed to score new records: the network, the configuration it
/// was built with, and the frozen time/feature transforms from training.
struct TrainedModel {
  ModelConfig config;
  NetworkParams params;
  TimeScale time_scale;
  FeatureScaler scaler;
};

/// Versioned plain-text format; floats are written with %.17g so parsing
/// reproduces every double bit-exactly.
std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(const std::string& text);

void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

/// Writes to a sibling temp file and renames into place, so a failed write
/// never leaves a partial file at `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace opsurv
