#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "opsurv/quadrature.hpp"

namespace opsurv {

/// One observation. `event` is 0 for censored, otherwise a 1-based event
/// code. `time` is in raw units until a TimeScale is applied.
struct SurvivalRecord {
  std::vector<double> covariates;
  double time = 0.0;
  int event = 0;
};

/// CSV contract: UTF-8, comma separated, header row with `duration` and
/// `event` columns; every other column is a feature, kept in header order.
struct CsvSchema {
  int n_events = 1;
  // When >= 0, the file must have exactly this many feature columns.
  int expected_features = -1;
};

struct LoadedCsv {
  std::vector<SurvivalRecord> records;
  std::vector<std::string> feature_names;
};

LoadedCsv load_csv(const std::string& path, const CsvSchema& schema);

/// Linear map from raw to scaled time, chosen so every quadrature evaluation
/// point of the largest observed time lands in [0, 5], where the weighted
/// basis still carries mass: factor = (1/t_max) * (10 / (r_top + 1)).
struct TimeScale {
  double t_max = 1.0;
  int quad_order = 0;
  double top_node = 0.0;
  double factor = 1.0;

  double scaled(double raw) const { return raw * factor; }
  double unscale(double scaled_time) const { return scaled_time / factor; }
};

TimeScale fit_time_scale(std::span<const SurvivalRecord> records,
                         const QuadratureRule& rule);

/// Per-feature affine transform fitted on training data.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> stddev;  // zero-variance features keep stddev 1

  void apply(std::vector<double>& covariates) const;
};

FeatureScaler fit_feature_scaler(std::span<const SurvivalRecord> records);

/// 64/16/20 split with the remainder going to test. Records in the splits
/// carry standardized covariates and scaled times; both transforms are
/// fitted on the training split only. Index vectors refer back to the
/// caller's record list.
struct SplitDataset {
  std::vector<SurvivalRecord> train;
  std::vector<SurvivalRecord> validation;
  std::vector<SurvivalRecord> test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> validation_indices;
  std::vector<std::size_t> test_indices;
  TimeScale scale;
  FeatureScaler scaler;
  // Test/validation records whose raw time exceeds the training maximum;
  // they are still scaled with the frozen factor.
  int n_beyond_train_window = 0;
};

SplitDataset split(std::span<const SurvivalRecord> records, std::uint64_t seed,
                   const QuadratureRule& rule);

/// Closed-form ground truth for the synthetic generator: constant
/// cause-specific rates lambda_e = exp(beta_e . x) per record, so
/// CIF_e(t|x) = (lambda_e / L) * (1 - exp(-L t)) with L = sum lambda.
struct SyntheticTruth {
  std::vector<std::vector<double>> betas;  // n_events x n_features
  double censor_max = 0.0;                 // 0 when censor_rate == 0

  double cif(std::span<const double> covariates, int event_index,
             double raw_time) const;
};

struct SyntheticData {
  std::vector<SurvivalRecord> records;
  SyntheticTruth truth;
};

/// Covariates are seeded standard normal; per-cause latent times are
/// exponential with rate exp(beta_e . x); censoring times are uniform on
/// [0, c_max] with c_max calibrated so the expected censored fraction hits
/// censor_rate. Supports one or two competing events.
SyntheticData generate_synthetic(int n, int n_features, int n_events,
                                 std::uint64_t seed, double censor_rate);

/// The beta vectors the generator publishes for a given shape.
std::vector<std::vector<double>> synthetic_betas(int n_features, int n_events);

/// Serialize records in the standard CSV schema (duration, event, features).
std::string records_to_csv(std::span<const SurvivalRecord> records);

}  // namespace opsurv
