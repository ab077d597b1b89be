#include <benchmark/benchmark.h>

#include <vector>

#include "opsurv/data.hpp"
#include "opsurv/hermite.hpp"
#include "opsurv/model.hpp"
#include "opsurv/quadrature.hpp"
#include "opsurv/rng.hpp"
#include "opsurv/training.hpp"

using namespace opsurv;

namespace {

void BM_BasisRow(benchmark::State& state) {
  const BasisSpec spec{static_cast<int>(state.range(0))};
  std::vector<double> row(static_cast<std::size_t>(spec.max_degree) + 1);
  double t = 0.0;
  for (auto _ : state) {
    t += 1e-3;
    function_row_into(spec, t, row.data());
    benchmark::DoNotOptimize(row.data());
  }
}
BENCHMARK(BM_BasisRow)->Arg(8)->Arg(15)->Arg(20);

void BM_BuildRule(benchmark::State& state) {
  for (auto _ : state) {
    auto rule = build_rule(static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(rule.nodes.data());
  }
}
BENCHMARK(BM_BuildRule)->Arg(20)->Arg(64);

void BM_Cdf(benchmark::State& state) {
  ModelConfig config;
  config.n_features = 1;
  config.max_degree = static_cast<int>(state.range(0));
  config.quad_order = 20;
  const ModelContext ctx = ModelContext::make(config);
  Rng rng(1);
  std::vector<double> row(static_cast<std::size_t>(config.max_degree) + 1);
  for (double& a : row) a = rng.uniform(-1.0, 1.0);
  double t = 0.0;
  for (auto _ : state) {
    t = t < 5.0 ? t + 1e-3 : 1e-3;
    benchmark::DoNotOptimize(cdf(ctx, row, t));
  }
}
BENCHMARK(BM_Cdf)->Arg(8)->Arg(15);

void BM_Forward(benchmark::State& state) {
  ModelConfig config;
  config.n_features = 24;
  config.n_events = 2;
  const ModelContext ctx = ModelContext::make(config);
  Rng rng(2);
  NetworkParams params = init_params(config, rng);
  std::vector<double> x(24);
  for (double& v : x) v = rng.normal();
  for (auto _ : state) {
    auto out = forward(ctx, params, x);
    benchmark::DoNotOptimize(out.alphas.data());
  }
}
BENCHMARK(BM_Forward);

void BM_BatchGradients(benchmark::State& state) {
  ModelConfig config;
  config.n_features = 8;
  config.n_events = 2;
  const ModelContext ctx = ModelContext::make(config);
  Rng rng(3);
  NetworkParams params = init_params(config, rng);
  SyntheticData synth =
      generate_synthetic(static_cast<int>(state.range(0)), 8, 2, 7, 0.3);
  const QuadratureRule rule = build_rule(config.quad_order);
  TimeScale scale = fit_time_scale(synth.records, rule);
  for (auto& rec : synth.records) rec.time = scale.scaled(rec.time);
  TrainConfig tcfg;
  tcfg.batch_size = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto eval = evaluate_batch(ctx, params, synth.records, tcfg, true);
    benchmark::DoNotOptimize(eval.total);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BatchGradients)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
