// Acceptance suite: one line per criterion, [PASS]/[FAIL]/[SKIP], nonzero
// exit when anything fails. Criterion 8 needs the METABRIC CSV, supplied via
// OPSURV_METABRIC_CSV; criterion 9 needs --cli <path to the opsurv binary>.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "opsurv/data.hpp"
#include "opsurv/hermite.hpp"
#include "opsurv/metrics.hpp"
#include "opsurv/model.hpp"
#include "opsurv/model_io.hpp"
#include "opsurv/quadrature.hpp"
#include "opsurv/rng.hpp"
#include "opsurv/training.hpp"

using namespace opsurv;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------- criterion 1
Outcome quadrature_exactness() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(1001);
  double worst = 0.0;
  for (int order = 1; order <= 20; ++order) {
    const QuadratureRule rule = build_rule(order);
    for (int trial = 0; trial < 50; ++trial) {
      const int degree =
          static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * order)));
      std::vector<double> coeffs(static_cast<std::size_t>(degree) + 1);
      for (double& c : coeffs) c = rng.uniform(-1.0, 1.0);
      const double t = rng.uniform(0.0, 4.0);
      auto poly = [&](double u) {
        double acc = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * u + coeffs[k];
        return acc;
      };
      double expected = 0.0;
      double tk = t;
      for (std::size_t k = 0; k < coeffs.size(); ++k) {
        expected += coeffs[k] * tk / static_cast<double>(k + 1);
        tk *= t;
      }
      const double got = antiderivative_at(rule, poly, t);
      worst = std::max(worst,
                       std::fabs(got - expected) / (1.0 + std::fabs(expected)));
    }
  }
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = worst < 1e-10 && elapsed < 1.0;
  out.detail = fmt("max scaled error %.2e over orders 1..20, %.2f s", worst,
                   elapsed);
  return out;
}

// ---------------------------------------------------------------- criterion 2
Outcome orthonormality() {
  const auto start = std::chrono::steady_clock::now();
  const int max_degree = 15;
  const double step = 1e-3;
  const long n = static_cast<long>(24.0 / step);
  const BasisSpec spec{max_degree};
  std::vector<double> sums((max_degree + 1) * (max_degree + 1), 0.0);
  std::vector<double> row(static_cast<std::size_t>(max_degree) + 1);
  for (long k = 0; k <= n; ++k) {
    const double t = -12.0 + step * static_cast<double>(k);
    basis_row_into(spec, t, row.data());
    const double w = std::exp(-t * t) * ((k == 0 || k == n) ? 0.5 : 1.0);
    for (int i = 0; i <= max_degree; ++i) {
      const double wi = w * row[static_cast<std::size_t>(i)];
      for (int j = i; j <= max_degree; ++j) {
        sums[static_cast<std::size_t>(i * (max_degree + 1) + j)] +=
            wi * row[static_cast<std::size_t>(j)];
      }
    }
  }
  double worst = 0.0;
  for (int i = 0; i <= max_degree; ++i) {
    for (int j = i; j <= max_degree; ++j) {
      const double value =
          sums[static_cast<std::size_t>(i * (max_degree + 1) + j)] * step;
      const double expected = i == j ? 1.0 : 0.0;
      worst = std::max(worst, std::fabs(value - expected));
    }
  }
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = worst < 1e-6 && elapsed < 10.0;
  out.detail = fmt("max |<h_i,h_j> - delta| = %.2e over pairs i,j <= 15, %.2f s",
                   worst, elapsed);
  return out;
}

// ---------------------------------------------------------------- criterion 3
Outcome density_normalization() {
  Rng rng(3003);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int degree = static_cast<int>(rng.below(16));
    const BasisSpec spec{degree};
    std::vector<double> coeff(static_cast<std::size_t>(degree) + 1);
    for (double& a : coeff) a = rng.uniform(-1.0, 1.0);
    const double step = 1e-3;
    const long n = static_cast<long>(24.0 / step);
    double mass = 0.0;
    for (long k = 0; k <= n; ++k) {
      const double t = -12.0 + step * static_cast<double>(k);
      const double v = density(spec, coeff, t);
      mass += (k == 0 || k == n) ? 0.5 * v : v;
    }
    mass *= step;
    worst = std::max(worst, std::fabs(mass - 1.0));
  }
  Outcome out;
  out.pass = worst < 1e-6;
  out.detail = fmt("max |mass - 1| = %.2e over 100 random rows", worst);
  return out;
}

// ---------------------------------------------------------------- criterion 4
Outcome cdf_oracle() {
  Rng rng(4004);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int degree = static_cast<int>(rng.below(16));
    ModelConfig config;
    config.n_features = 1;
    config.max_degree = degree;
    config.quad_order = 20;
    const ModelContext ctx = ModelContext::make(config);
    std::vector<double> coeff(static_cast<std::size_t>(degree) + 1);
    for (double& a : coeff) a = rng.uniform(-1.0, 1.0);
    const double t = rng.uniform(1e-3, 5.0);
    const long n = 40000;
    double ref = 0.0;
    const double step = t / static_cast<double>(n);
    for (long k = 0; k <= n; ++k) {
      const double u = step * static_cast<double>(k);
      const double v = density(ctx.basis, coeff, u);
      ref += (k == 0 || k == n) ? 0.5 * v : v;
    }
    ref *= step;
    worst = std::max(worst, std::fabs(cdf(ctx, coeff, t) - ref));
  }

  // Closed form: the degree-0 density is the unit gaussian, F(1) = erf(1)/2.
  ModelConfig config;
  config.n_features = 1;
  config.max_degree = 0;
  config.quad_order = 20;
  const ModelContext ctx = ModelContext::make(config);
  std::vector<double> unit = {1.0};
  const double closed = std::fabs(cdf(ctx, unit, 1.0) - 0.42135039647485743);
  worst = std::max(worst, closed);

  Outcome out;
  out.pass = worst < 1e-6;
  out.detail = fmt("max |quadrature - trapezoid| = %.2e (closed form %.2e)",
                   worst, closed);
  return out;
}

// ---------------------------------------------------------------- criterion 5
Outcome gradient_correctness() {
  const auto start = std::chrono::steady_clock::now();
  const ModelConfig config = grad_check_default_config();
  double worst = 0.0;
  bool all_pass = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const GradCheckReport report = grad_check(config, seed);
    worst = std::max(worst, report.max_rel_error);
    all_pass = all_pass && report.pass;
  }
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = all_pass && elapsed < 30.0;
  out.detail =
      fmt("max rel error %.2e over 10 seeds, %.2f s", worst, elapsed);
  return out;
}

// ---------------------------------------------------------------- criterion 6
Outcome synthetic_recovery() {
  const auto start = std::chrono::steady_clock::now();
  const SyntheticData synth = generate_synthetic(4000, 4, 2, 60006, 0.3);

  ModelConfig mcfg;
  mcfg.n_features = 4;
  mcfg.n_events = 2;

  const QuadratureRule rule = build_rule(mcfg.quad_order);
  const SplitDataset data = split(synth.records, 60006, rule);

  // Ceiling first: the ground-truth CIFs must themselves score >= 0.80.
  CifFn truth_cif = [&](std::size_t i, int e, double t) {
    const SurvivalRecord& raw = synth.records[data.test_indices[i]];
    return synth.truth.cif(raw.covariates, e, data.scale.unscale(t));
  };
  const double inf = std::numeric_limits<double>::infinity();
  const double truth_c1 = td_c_index(truth_cif, data.test, 0, inf);
  const double truth_c2 = td_c_index(truth_cif, data.test, 1, inf);
  if (truth_c1 < 0.80 || truth_c2 < 0.80) {
    Outcome out;
    out.detail = fmt("ground-truth ceiling not met: td-C %.3f / %.3f",
                     truth_c1, truth_c2);
    return out;
  }

  TrainConfig tcfg;
  tcfg.epochs = 50;
  tcfg.seed = 60006;
  const TrainResult result = train(data, mcfg, tcfg);

  const ModelContext ctx = ModelContext::make(mcfg);
  std::vector<CoefficientOutput> outputs;
  outputs.reserve(data.test.size());
  for (const auto& rec : data.test) {
    outputs.push_back(forward(ctx, result.params, rec.covariates));
  }
  CifFn model_cif = [&](std::size_t i, int e, double t) {
    return cif(ctx, outputs[i], e, t);
  };
  const double model_c1 = td_c_index(model_cif, data.test, 0, inf);
  const double model_c2 = td_c_index(model_cif, data.test, 1, inf);

  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = model_c1 >= 0.70 && model_c2 >= 0.70 && elapsed < 300.0;
  out.detail = fmt("model td-C %.3f / %.3f (truth %.3f / %.3f), %.0f s",
                   model_c1, model_c2, truth_c1, truth_c2, elapsed);
  return out;
}

// ---------------------------------------------------------------- criterion 7
Outcome metric_oracles() {
  Rng rng(7007);
  // Harrell and td-C against exhaustive enumeration; exact equality.
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(13));
    std::vector<SurvivalRecord> records(static_cast<std::size_t>(n));
    std::vector<double> risk(static_cast<std::size_t>(n));
    std::vector<double> times(static_cast<std::size_t>(n));
    std::vector<int> flags(static_cast<std::size_t>(n));
    std::vector<double> table(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const std::size_t iu = static_cast<std::size_t>(i);
      times[iu] = static_cast<double>(1 + rng.below(6));
      flags[iu] = rng.below(3) == 0 ? 0 : 1;
      risk[iu] = rng.below(5) == 0 ? 0.5 : rng.uniform(0.0, 1.0);
      table[iu] = rng.uniform(0.0, 1.0);
      records[iu].covariates = {0.0};
      records[iu].time = times[iu];
      records[iu].event = flags[iu];
    }
    // Harrell.
    {
      double num = 0.0;
      long den = 0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const std::size_t iu = static_cast<std::size_t>(i);
          const std::size_t ju = static_cast<std::size_t>(j);
          if (i == j || flags[iu] == 0 || !(times[iu] < times[ju])) continue;
          ++den;
          if (risk[iu] > risk[ju]) num += 1.0;
          if (risk[iu] == risk[ju]) num += 0.5;
        }
      }
      if (den > 0) {
        const double got = harrell_c_index(risk, times, flags);
        if (got != num / static_cast<double>(den)) {
          Outcome out;
          out.detail = fmt("harrell mismatch on trial %d", trial);
          return out;
        }
      }
    }
    // td-C with a deterministic CIF table.
    {
      CifFn cif_fn = [&](std::size_t i, int, double t) {
        return table[i] * (1.0 - std::exp(-t));
      };
      double num = 0.0;
      long den = 0;
      for (int m = 0; m < n; ++m) {
        const std::size_t mu = static_cast<std::size_t>(m);
        if (records[mu].event != 1) continue;
        for (int k = 0; k < n; ++k) {
          const std::size_t ku = static_cast<std::size_t>(k);
          if (m == k || !(records[mu].time < records[ku].time)) continue;
          ++den;
          const double a = cif_fn(mu, 0, records[mu].time);
          const double b = cif_fn(ku, 0, records[mu].time);
          if (a > b) num += 1.0;
          if (a == b) num += 0.5;
        }
      }
      if (den > 0) {
        const double got =
            td_c_index(cif_fn, records, 0,
                       std::numeric_limits<double>::infinity());
        if (got != num / static_cast<double>(den)) {
          Outcome out;
          out.detail = fmt("td-C mismatch on trial %d", trial);
          return out;
        }
      }
    }
  }

  // Documented 4-record IPCW fixture.
  std::vector<SurvivalRecord> fixture(4);
  const double fixture_times[4] = {1.0, 2.0, 3.0, 4.0};
  const int fixture_events[4] = {1, 0, 1, 0};
  const double preds[4] = {0.8, 0.5, 0.4, 0.1};
  for (int i = 0; i < 4; ++i) {
    fixture[static_cast<std::size_t>(i)].covariates = {0.0};
    fixture[static_cast<std::size_t>(i)].time = fixture_times[i];
    fixture[static_cast<std::size_t>(i)].event = fixture_events[i];
  }
  std::vector<double> km_times(fixture_times, fixture_times + 4);
  std::vector<int> censor_flags = {0, 1, 0, 1};
  const KaplanMeierCurve censor_km = km_estimate(km_times, censor_flags);
  CifFn fixed = [&](std::size_t i, int, double) { return preds[i]; };
  const double brier = brier_at(fixed, fixture, 0, 2.5, censor_km);
  const double fixture_error = std::fabs(brier - 0.07375);

  Outcome out;
  out.pass = fixture_error < 1e-12;
  out.detail = fmt("200 brute-force instances exact; fixture |err| = %.1e",
                   fixture_error);
  return out;
}

// ---------------------------------------------------------------- criterion 8
Outcome metabric_reproduction() {
  const char* path = std::getenv("OPSURV_METABRIC_CSV");
  Outcome out;
  if (path == nullptr || std::string(path).empty()) {
    out.skipped = true;
    out.detail = "set OPSURV_METABRIC_CSV to the preprocessed METABRIC CSV "
                 "to run this criterion";
    return out;
  }
  const auto start = std::chrono::steady_clock::now();
  CsvSchema schema;
  schema.n_events = 1;
  LoadedCsv loaded = load_csv(path, schema);

  ModelConfig mcfg;
  mcfg.n_features = static_cast<int>(loaded.feature_names.size());
  mcfg.n_events = 1;
  mcfg.max_degree = 11;
  mcfg.quad_order = 20;

  TrainConfig tcfg;
  tcfg.epochs = 100;
  tcfg.batch_size = 200;
  tcfg.learning_rate = 1e-3;
  tcfg.seed = 8008;

  const QuadratureRule rule = build_rule(mcfg.quad_order);
  const SplitDataset data = split(loaded.records, tcfg.seed, rule);
  const TrainResult result = train(data, mcfg, tcfg);

  const ModelContext ctx = ModelContext::make(mcfg);
  std::vector<CoefficientOutput> outputs;
  for (const auto& rec : data.test) {
    outputs.push_back(forward(ctx, result.params, rec.covariates));
  }
  CifFn model_cif = [&](std::size_t i, int e, double t) {
    return cif(ctx, outputs[i], e, t);
  };
  MetricsReport report = compute_metrics(model_cif, data.test, 1);
  const double tdc = report.per_event[0].td_c_index;
  const double ibs = report.per_event[0].integrated_brier;
  const double elapsed = seconds_since(start);
  out.pass = tdc >= 0.55 && tdc <= 0.65 && ibs >= 0.17 && ibs <= 0.23 &&
             elapsed < 300.0;
  out.detail = fmt("td-C %.3f (target [0.55, 0.65]), IBS %.3f "
                   "(target [0.17, 0.23]), %.0f s",
                   tdc, ibs, elapsed);
  return out;
}

// ---------------------------------------------------------------- criterion 9
int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = cli + " " + args + " > /dev/null 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const std::string& cli) {
  Outcome out;
  if (cli.empty()) {
    out.skipped = true;
    out.detail = "pass --cli <path> to exercise the command line end to end";
    return out;
  }
  const fs::path dir =
      fs::temp_directory_path() / ("opsurv_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string data = (dir / "d.csv").string();
  if (run_cli(cli, "synth --n 200 --features 3 --events 2 --censor-rate 0.25 "
                   "--seed 88 --out " + data) != 0) {
    out.detail = "synth failed";
    return out;
  }
  const std::string train_args =
      "train --data " + data + " --n-events 2 --epochs 3 --batch-size 50 "
      "--max-degree 5 --quad-order 16 --hidden 8 --seed 88 --out ";
  const std::string m1 = (dir / "m1.txt").string();
  const std::string m2 = (dir / "m2.txt").string();
  if (run_cli(cli, train_args + m1) != 0 || run_cli(cli, train_args + m2) != 0) {
    out.detail = "train failed";
    return out;
  }
  const bool models_match = slurp(m1) == slurp(m2);

  const std::string r1 = (dir / "r1.csv").string();
  const std::string r2 = (dir / "r2.csv").string();
  if (run_cli(cli, "evaluate --model " + m1 + " --data " + data + " --out " + r1) != 0 ||
      run_cli(cli, "evaluate --model " + m2 + " --data " + data + " --out " + r2) != 0) {
    out.detail = "evaluate failed";
    return out;
  }
  const bool reports_match = slurp(r1) == slurp(r2);
  fs::remove_all(dir);

  out.pass = models_match && reports_match;
  out.detail = fmt("model files %s, metric reports %s",
                   models_match ? "identical" : "differ",
                   reports_match ? "identical" : "differ");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
  }

  struct Criterion {
    int id;
    const char* label;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "quadrature exactness", quadrature_exactness},
      {2, "basis orthonormality", orthonormality},
      {3, "density normalization", density_normalization},
      {4, "cdf quadrature vs trapezoid oracle", cdf_oracle},
      {5, "gradient correctness", gradient_correctness},
      {6, "synthetic recovery", synthetic_recovery},
      {7, "metric oracle equivalence", metric_oracles},
      {8, "metabric desk-scale reproduction", metabric_reproduction},
      {9, "determinism of cli outputs", [&] { return determinism(cli); }},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const char* tag = outcome.skipped ? "SKIP" : (outcome.pass ? "PASS" : "FAIL");
    std::printf("[%s] criterion %d: %s — %s\n", tag, criterion.id,
                criterion.label, outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass && !outcome.skipped) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  return 0;
}
