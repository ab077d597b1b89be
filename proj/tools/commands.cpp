#include "commands.hpp"

#include <cstdio>
#include <iostream>

#include <json.hpp>

#include "opsurv/errors.hpp"
#include "opsurv/metrics.hpp"
#include "opsurv/model_io.hpp"
#include "opsurv/training.hpp"

namespace opsurv::cli {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct ScoredDataset {
  TrainedModel model;
  ModelContext ctx;
  std::vector<SurvivalRecord> records;  // standardized covariates, scaled time
  std::vector<CoefficientOutput> outputs;
};

ScoredDataset load_and_score(const std::string& model_path,
                             const std::string& data_path) {
  ScoredDataset ds;
  ds.model = load_model(model_path);
  ds.ctx = ModelContext::make(ds.model.config);
  CsvSchema schema;
  schema.n_events = ds.model.config.n_events;
  schema.expected_features = ds.model.config.n_features;
  ds.records = load_csv(data_path, schema).records;
  if (ds.records.empty()) throw DataError("'" + data_path + "' has no rows");
  for (auto& rec : ds.records) {
    ds.model.scaler.apply(rec.covariates);
    rec.time = ds.model.time_scale.scaled(rec.time);
  }
  ds.outputs.reserve(ds.records.size());
  for (const auto& rec : ds.records) {
    ds.outputs.push_back(forward(ds.ctx, ds.model.params, rec.covariates));
  }
  return ds;
}

}  // namespace

int cmd_train(const RunConfig& config) {
  if (config.data_path.empty()) throw ConfigError("train needs a data path");
  if (config.out_path.empty()) throw ConfigError("train needs an output path");

  CsvSchema schema;
  schema.n_events = config.n_events;
  LoadedCsv loaded = load_csv(config.data_path, schema);

  ModelConfig model_config;
  model_config.n_features = static_cast<int>(loaded.feature_names.size());
  model_config.n_events = config.n_events;
  model_config.max_degree = config.max_degree;
  model_config.quad_order = config.quad_order;
  model_config.hidden_sizes = config.hidden_sizes;
  validate(model_config);

  TrainConfig train_config;
  train_config.epochs = config.epochs;
  train_config.batch_size = config.batch_size;
  train_config.learning_rate = config.learning_rate;
  train_config.likelihood_weight = config.likelihood_weight;
  train_config.ranking_weight = config.ranking_weight;
  train_config.seed = config.seed;
  validate(train_config);

  const QuadratureRule rule = build_rule(model_config.quad_order);
  SplitDataset data = split(loaded.records, config.seed, rule);
  if (data.n_beyond_train_window > 0) {
    std::cerr << "warning: " << data.n_beyond_train_window
              << " held-out records exceed the training time window\n";
  }

  TrainResult result = train(data, model_config, train_config);

  TrainedModel model;
  model.config = model_config;
  model.params = result.params;
  model.time_scale = data.scale;
  model.scaler = data.scaler;
  save_model(model, config.out_path);

  const std::string log_path = config.loss_log_path.empty()
                                   ? config.out_path + ".losses.csv"
                                   : config.loss_log_path;
  write_file_atomic(log_path, loss_log_csv(result.log));

  std::cout << "trained " << config.epochs << " epochs on "
            << data.train.size() << " records (best epoch "
            << result.best_epoch << "); model -> " << config.out_path
            << ", losses -> " << log_path << "\n";
  if (result.clamp_events > 0) {
    std::cerr << "note: " << result.clamp_events
              << " likelihood terms hit the log clamp during training\n";
  }
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& data_path,
                 const std::string& out_path, int ibs_grid_points) {
  ScoredDataset ds = load_and_score(model_path, data_path);
  CifFn cif_fn = [&](std::size_t i, int event_index, double t) {
    return cif(ds.ctx, ds.outputs[i], event_index, t);
  };
  MetricsOptions options;
  options.ibs_grid_points = ibs_grid_points;
  MetricsReport report =
      compute_metrics(cif_fn, ds.records, ds.model.config.n_events, options);
  std::cout << metrics_report_table(report);
  if (!out_path.empty()) {
    write_file_atomic(out_path, metrics_report_csv(report));
    std::cout << "report -> " << out_path << "\n";
  }
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::vector<double>& raw_times,
                const std::string& out_path) {
  if (raw_times.empty()) throw ConfigError("predict needs at least one time");
  for (double t : raw_times) {
    if (t < 0.0) throw ConfigError("prediction times must be >= 0");
  }
  ScoredDataset ds = load_and_score(model_path, data_path);

  std::string out = "record,time,survival";
  for (int e = 1; e <= ds.model.config.n_events; ++e) {
    out += ",cif_" + std::to_string(e);
  }
  out += "\n";
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    for (double raw : raw_times) {
      const double t = ds.model.time_scale.scaled(raw);
      out += std::to_string(i) + "," + fmt(raw) + "," +
             fmt(survival(ds.ctx, ds.outputs[i], t));
      for (int e = 0; e < ds.model.config.n_events; ++e) {
        out += "," + fmt(cif(ds.ctx, ds.outputs[i], e, t));
      }
      out += "\n";
    }
  }
  if (out_path.empty()) {
    std::cout << out;
  } else {
    write_file_atomic(out_path, out);
    std::cout << "predictions -> " << out_path << "\n";
  }
  return 0;
}

int cmd_curves(const std::string& model_path, const std::string& data_path,
               int grid_points, const std::string& out_path) {
  if (grid_points < 2) throw ConfigError("curves needs a grid of >= 2 points");
  if (out_path.empty()) throw ConfigError("curves needs an output path");
  ScoredDataset ds = load_and_score(model_path, data_path);

  std::string out = "record,time,survival";
  for (int e = 1; e <= ds.model.config.n_events; ++e) {
    out += ",cif_" + std::to_string(e);
  }
  out += ",hazard\n";
  const double t_max = ds.model.time_scale.t_max;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    for (int k = 0; k < grid_points; ++k) {
      const double raw = t_max * static_cast<double>(k) /
                         static_cast<double>(grid_points - 1);
      const double t = ds.model.time_scale.scaled(raw);
      out += std::to_string(i) + "," + fmt(raw) + "," +
             fmt(survival(ds.ctx, ds.outputs[i], t));
      for (int e = 0; e < ds.model.config.n_events; ++e) {
        out += "," + fmt(cif(ds.ctx, ds.outputs[i], e, t));
      }
      // Hazard per raw time unit; the chain rule through the time scaling
      // multiplies the scaled-domain value by the scale factor.
      out += "," +
             fmt(hazard(ds.ctx, ds.outputs[i], t) * ds.model.time_scale.factor);
      out += "\n";
    }
  }
  write_file_atomic(out_path, out);
  std::cout << "curves -> " << out_path << "\n";
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, int n_seeds, bool corrupt) {
  if (n_seeds < 1) throw ConfigError("gradcheck needs >= 1 seeds");
  const ModelConfig config = grad_check_default_config();
  bool all_pass = true;
  for (int k = 0; k < n_seeds; ++k) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(k);
    GradCheckReport report = grad_check(config, s, corrupt);
    std::printf("seed %llu: max rel error %.3e over %zu entries -> %s\n",
                static_cast<unsigned long long>(s), report.max_rel_error,
                report.checked, report.pass ? "pass" : "FAIL");
    all_pass = all_pass && report.pass;
  }
  return all_pass ? 0 : 1;
}

int cmd_synth(int n, int n_features, int n_events, double censor_rate,
              std::uint64_t seed, const std::string& out_path) {
  if (out_path.empty()) throw ConfigError("synth needs an output path");
  SyntheticData data =
      generate_synthetic(n, n_features, n_events, seed, censor_rate);
  write_file_atomic(out_path, records_to_csv(data.records));

  nlohmann::json meta;
  meta["n"] = n;
  meta["n_features"] = n_features;
  meta["n_events"] = n_events;
  meta["censor_rate"] = censor_rate;
  meta["seed"] = seed;
  meta["censor_max"] = data.truth.censor_max;
  meta["betas"] = data.truth.betas;
  write_file_atomic(out_path + ".meta.json", meta.dump(2) + "\n");

  std::cout << "synthetic data -> " << out_path << " (+.meta.json)\n";
  return 0;
}

}  // namespace opsurv::cli
