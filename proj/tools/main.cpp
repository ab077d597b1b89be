#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "opsurv/errors.hpp"
#include "run_config.hpp"

namespace {

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    if (!item.empty()) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw opsurv::ConfigError("bad time value '" + item + "'");
      }
    }
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OPSurv: survival and competing-risks modeling with "
               "orthogonal-polynomial densities"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t global_seed = 0;
  bool global_seed_set = false;
  std::string global_out;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--seed", global_seed, "default seed for all subcommands")
      ->each([&](const std::string&) { global_seed_set = true; });
  app.add_option("--out", global_out, "default output path");

  opsurv::cli::RunConfig run;

  // train
  CLI::App* train = app.add_subcommand("train", "fit a model on a CSV dataset");
  std::string hidden_text;
  train->add_option("--data", run.data_path, "training CSV");
  train->add_option("--out", run.out_path, "model output path");
  train->add_option("--loss-log", run.loss_log_path, "loss log CSV path");
  train->add_option("--n-events", run.n_events, "number of competing events");
  train->add_option("--max-degree", run.max_degree, "basis truncation degree");
  train->add_option("--quad-order", run.quad_order, "quadrature order");
  train->add_option("--hidden", hidden_text, "hidden sizes, e.g. 32,32");
  train->add_option("--epochs", run.epochs, "training epochs");
  train->add_option("--batch-size", run.batch_size, "minibatch size");
  train->add_option("--learning-rate", run.learning_rate, "Adam learning rate");
  train->add_option("--likelihood-weight", run.likelihood_weight,
                    "weight of the likelihood loss");
  train->add_option("--ranking-weight", run.ranking_weight,
                    "weight of the ranking loss");
  train->add_option("--seed", run.seed, "seed for init, split and shuffling");

  // evaluate
  CLI::App* evaluate = app.add_subcommand("evaluate", "score a test CSV");
  std::string eval_model, eval_data, eval_out;
  int eval_grid = 100;
  evaluate->add_option("--model", eval_model, "model file")->required();
  evaluate->add_option("--data", eval_data, "test CSV")->required();
  evaluate->add_option("--out", eval_out, "metrics CSV path");
  evaluate->add_option("--ibs-grid", eval_grid, "integrated Brier grid size");

  // predict
  CLI::App* predict = app.add_subcommand(
      "predict", "per-record survival and CIFs at chosen times");
  std::string pred_model, pred_data, pred_out, pred_times;
  predict->add_option("--model", pred_model, "model file")->required();
  predict->add_option("--data", pred_data, "input CSV")->required();
  predict->add_option("--times", pred_times, "raw times, e.g. 1.5,3,10")
      ->required();
  predict->add_option("--out", pred_out, "output CSV path");

  // curves
  CLI::App* curves = app.add_subcommand(
      "curves", "per-record survival/CIF/hazard curves on a time grid");
  std::string curves_model, curves_data, curves_out;
  int curves_grid = 200;
  curves->add_option("--model", curves_model, "model file")->required();
  curves->add_option("--data", curves_data, "input CSV")->required();
  curves->add_option("--grid", curves_grid, "number of grid points");
  curves->add_option("--out", curves_out, "output CSV path");

  // gradcheck
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "verify analytic gradients against finite differences");
  std::uint64_t gc_seed = 0;
  bool gc_seed_set = false;
  int gc_sweep = 1;
  bool gc_corrupt = false;
  gradcheck->add_option("--seed", gc_seed, "base seed")
      ->each([&](const std::string&) { gc_seed_set = true; });
  gradcheck->add_option("--sweep", gc_sweep, "number of consecutive seeds");
  gradcheck->add_flag("--corrupt", gc_corrupt,
                      "negative control: perturb one gradient entry");

  // synth
  CLI::App* synth = app.add_subcommand(
      "synth", "generate a synthetic competing-risks dataset");
  int synth_n = 1000, synth_features = 4, synth_events = 2;
  double synth_censor = 0.3;
  std::uint64_t synth_seed = 0;
  bool synth_seed_set = false;
  std::string synth_out;
  synth->add_option("--n", synth_n, "number of records");
  synth->add_option("--features", synth_features, "number of covariates");
  synth->add_option("--events", synth_events, "number of competing events");
  synth->add_option("--censor-rate", synth_censor, "target censored fraction");
  synth->add_option("--seed", synth_seed, "generator seed")
      ->each([&](const std::string&) { synth_seed_set = true; });
  synth->add_option("--out", synth_out, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train->parsed()) {
      if (!config_path.empty()) {
        // File values first, then re-apply any explicit flags on top.
        opsurv::cli::RunConfig from_file;
        opsurv::cli::apply_config_file(from_file, config_path);
        auto keep = [&](auto& target, const auto& flag_value, const char* name) {
          if (train->count(name) == 0) return;
          target = flag_value;
        };
        opsurv::cli::RunConfig merged = from_file;
        keep(merged.data_path, run.data_path, "--data");
        keep(merged.out_path, run.out_path, "--out");
        keep(merged.loss_log_path, run.loss_log_path, "--loss-log");
        keep(merged.n_events, run.n_events, "--n-events");
        keep(merged.max_degree, run.max_degree, "--max-degree");
        keep(merged.quad_order, run.quad_order, "--quad-order");
        keep(merged.epochs, run.epochs, "--epochs");
        keep(merged.batch_size, run.batch_size, "--batch-size");
        keep(merged.learning_rate, run.learning_rate, "--learning-rate");
        keep(merged.likelihood_weight, run.likelihood_weight,
             "--likelihood-weight");
        keep(merged.ranking_weight, run.ranking_weight, "--ranking-weight");
        keep(merged.seed, run.seed, "--seed");
        if (train->count("--hidden") > 0) {
          merged.hidden_sizes = opsurv::cli::parse_int_list(hidden_text);
        }
        run = merged;
      } else if (train->count("--hidden") > 0) {
        run.hidden_sizes = opsurv::cli::parse_int_list(hidden_text);
      }
      if (train->count("--seed") == 0 && global_seed_set) run.seed = global_seed;
      if (run.out_path.empty()) run.out_path = global_out;
      return opsurv::cli::cmd_train(run);
    }
    if (evaluate->parsed()) {
      if (eval_out.empty()) eval_out = global_out;
      return opsurv::cli::cmd_evaluate(eval_model, eval_data, eval_out,
                                       eval_grid);
    }
    if (predict->parsed()) {
      if (pred_out.empty()) pred_out = global_out;
      return opsurv::cli::cmd_predict(pred_model, pred_data,
                                      parse_double_list(pred_times), pred_out);
    }
    if (curves->parsed()) {
      if (curves_out.empty()) curves_out = global_out;
      return opsurv::cli::cmd_curves(curves_model, curves_data, curves_grid,
                                     curves_out);
    }
    if (gradcheck->parsed()) {
      if (!gc_seed_set && global_seed_set) gc_seed = global_seed;
      return opsurv::cli::cmd_gradcheck(gc_seed, gc_sweep, gc_corrupt);
    }
    if (synth->parsed()) {
      if (!synth_seed_set && global_seed_set) synth_seed = global_seed;
      if (synth_out.empty()) synth_out = global_out;
      return opsurv::cli::cmd_synth(synth_n, synth_features, synth_events,
                                    synth_censor, synth_seed, synth_out);
    }
  } catch (const opsurv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const opsurv::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
