#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "opsurv/data.hpp"
#include "opsurv/errors.hpp"
#include "opsurv/quadrature.hpp"

using namespace opsurv;

namespace {

std::string write_temp(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << contents;
  out.close();
  return path.string();
}

std::vector<SurvivalRecord> toy_records(int n, double t_max = 100.0) {
  std::vector<SurvivalRecord> records(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& r = records[static_cast<std::size_t>(i)];
    r.covariates = {static_cast<double>(i), static_cast<double>(i % 7) - 3.0};
    r.time = t_max * (static_cast<double>(i) + 1.0) / static_cast<double>(n);
    r.event = i % 3 == 0 ? 0 : 1 + (i % 2);
  }
  return records;
}

}  // namespace

TEST_CASE("csv loading") {
  const std::string ok = write_temp(
      "opsurv_ok.csv",
      "duration,event,age,size\n10.5,1,61,2.3\n3,0,55,1.1\n8.25,2,47,0.9\n");
  CsvSchema schema;
  schema.n_events = 2;
  LoadedCsv loaded = load_csv(ok, schema);
  REQUIRE(loaded.records.size() == 3);
  CHECK(loaded.feature_names == std::vector<std::string>{"age", "size"});
  CHECK(loaded.records[0].time == 10.5);
  CHECK(loaded.records[0].event == 1);
  CHECK(loaded.records[1].event == 0);
  CHECK(loaded.records[2].covariates == std::vector<double>{47.0, 0.9});

  // Column order does not matter for duration/event discovery.
  const std::string shuffled = write_temp(
      "opsurv_shuffled.csv", "age,event,duration\n61,1,10.5\n55,0,3\n");
  LoadedCsv loaded2 = load_csv(shuffled, schema);
  CHECK(loaded2.records[0].time == 10.5);
  CHECK(loaded2.records[0].covariates == std::vector<double>{61.0});

  const std::string bad_event = write_temp(
      "opsurv_bad_event.csv", "duration,event,f\n1,1,0\n2,7,0\n");
  CHECK_THROWS_WITH_AS(load_csv(bad_event, schema),
                       doctest::Contains("line 3"), DataError);

  const std::string no_header = write_temp("opsurv_no_header.csv",
                                           "time,status,f\n1,1,0\n");
  CHECK_THROWS_AS(load_csv(no_header, schema), DataError);

  const std::string no_features =
      write_temp("opsurv_no_features.csv", "duration,event\n1,1\n");
  CHECK_THROWS_AS(load_csv(no_features, schema), DataError);

  const std::string bad_cell = write_temp(
      "opsurv_bad_cell.csv", "duration,event,f\n1,1,oops\n");
  CHECK_THROWS_WITH_AS(load_csv(bad_cell, schema), doctest::Contains("line 2"),
                       DataError);

  CHECK_THROWS_AS(load_csv("/nonexistent/opsurv.csv", schema), DataError);

  const std::string all_censored = write_temp(
      "opsurv_censored.csv", "duration,event,f\n1,0,0\n2,0,1\n3,0,2\n");
  CHECK(load_csv(all_censored, schema).records.size() == 3);

  // Windows line endings parse the same way.
  const std::string crlf = write_temp(
      "opsurv_crlf.csv", "duration,event,f\r\n10.5,1,61\r\n3,0,55\r\n");
  LoadedCsv win = load_csv(crlf, schema);
  REQUIRE(win.records.size() == 2);
  CHECK(win.records[0].time == 10.5);
  CHECK(win.records[1].covariates == std::vector<double>{55.0});

  CsvSchema strict = schema;
  strict.expected_features = 5;
  CHECK_THROWS_AS(load_csv(ok, strict), DataError);
}

TEST_CASE("time scale hits the quadrature design point") {
  auto rule = build_rule(20);
  auto records = toy_records(50, 100.0);
  TimeScale scale = fit_time_scale(records, rule);
  CHECK(scale.t_max == 100.0);
  CHECK(scale.scaled(100.0) * (rule.top_node() + 1.0) / 2.0 ==
        doctest::Approx(5.0).epsilon(1e-12));
  CHECK(scale.scaled(0.0) == 0.0);
  CHECK(scale.scaled(50.0) == doctest::Approx(scale.scaled(100.0) / 2.0).epsilon(1e-15));

  for (double t : {1e-3, 0.37, 12.0, 99.9}) {
    CHECK(scale.unscale(scale.scaled(t)) == doctest::Approx(t).epsilon(1e-12));
  }

  // Every quadrature evaluation point of every observed time lands in [0, 5].
  for (const auto& rec : records) {
    const double st = scale.scaled(rec.time);
    for (double node : rule.nodes) {
      const double u = 0.5 * st * (node + 1.0);
      CHECK(u >= 0.0);
      CHECK(u <= 5.0 + 1e-12);
    }
  }

  std::vector<SurvivalRecord> zeros(3);
  for (auto& r : zeros) {
    r.covariates = {0.0};
    r.time = 0.0;
  }
  CHECK_THROWS_AS(fit_time_scale(zeros, rule), DataError);
}

TEST_CASE("split proportions, determinism and standardization") {
  auto rule = build_rule(20);
  auto records = toy_records(100);

  SplitDataset a = split(records, 42, rule);
  CHECK(a.train.size() == 64);
  CHECK(a.validation.size() == 16);
  CHECK(a.test.size() == 20);

  SplitDataset b = split(records, 42, rule);
  CHECK(a.train_indices == b.train_indices);
  CHECK(a.test_indices == b.test_indices);

  SplitDataset c = split(records, 43, rule);
  CHECK(a.train_indices != c.train_indices);

  auto odd = toy_records(101);
  SplitDataset d = split(odd, 7, rule);
  CHECK(d.train.size() == 64);
  CHECK(d.validation.size() == 16);
  CHECK(d.test.size() == 21);

  // Splits are disjoint and exhaustive.
  std::vector<int> seen(101, 0);
  for (auto i : d.train_indices) ++seen[i];
  for (auto i : d.validation_indices) ++seen[i];
  for (auto i : d.test_indices) ++seen[i];
  for (int s : seen) CHECK(s == 1);

  // Standardized training features: mean 0, sd 1.
  for (std::size_t f = 0; f < 2; ++f) {
    double mean = 0.0;
    for (const auto& r : d.train) mean += r.covariates[f];
    mean /= static_cast<double>(d.train.size());
    double var = 0.0;
    for (const auto& r : d.train) {
      var += (r.covariates[f] - mean) * (r.covariates[f] - mean);
    }
    var /= static_cast<double>(d.train.size());
    CHECK(mean == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-9));
  }

  auto tiny = toy_records(9);
  CHECK_THROWS_AS(split(tiny, 1, rule), DataError);
}

TEST_CASE("synthetic generator") {
  SyntheticData no_censor = generate_synthetic(500, 4, 2, 9, 0.0);
  for (const auto& r : no_censor.records) CHECK(r.event >= 1);

  SyntheticData a = generate_synthetic(200, 4, 2, 123, 0.3);
  SyntheticData b = generate_synthetic(200, 4, 2, 123, 0.3);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].time == b.records[i].time);
    CHECK(a.records[i].event == b.records[i].event);
    CHECK(a.records[i].covariates == b.records[i].covariates);
  }
  CHECK(records_to_csv(a.records) == records_to_csv(b.records));

  SyntheticData big = generate_synthetic(10000, 4, 2, 2024, 0.3);
  double censored = 0.0;
  for (const auto& r : big.records) censored += r.event == 0 ? 1.0 : 0.0;
  censored /= static_cast<double>(big.records.size());
  CHECK(std::fabs(censored - 0.3) <= 0.05);

  CHECK_THROWS_AS(generate_synthetic(10, 4, 3, 1, 0.3), ConfigError);
  CHECK_THROWS_AS(generate_synthetic(10, 4, 2, 1, 0.95), ConfigError);
}

TEST_CASE("synthetic ground truth is a valid CIF family") {
  SyntheticData data = generate_synthetic(50, 4, 2, 31, 0.2);
  for (const auto& r : data.records) {
    CHECK(data.truth.cif(r.covariates, 0, 0.0) == 0.0);
    double prev0 = -1.0;
    for (double t : {0.1, 0.5, 1.0, 2.0, 10.0}) {
      const double c0 = data.truth.cif(r.covariates, 0, t);
      const double c1 = data.truth.cif(r.covariates, 1, t);
      CHECK(c0 >= 0.0);
      CHECK(c0 + c1 <= 1.0 + 1e-12);
      CHECK(c0 >= prev0);
      prev0 = c0;
    }
  }
}

TEST_CASE("csv round trip through the generator schema") {
  SyntheticData data = generate_synthetic(40, 3, 2, 5, 0.25);
  const std::string path =
      write_temp("opsurv_roundtrip.csv", records_to_csv(data.records));
  CsvSchema schema;
  schema.n_events = 2;
  LoadedCsv loaded = load_csv(path, schema);
  REQUIRE(loaded.records.size() == data.records.size());
  for (std::size_t i = 0; i < loaded.records.size(); ++i) {
    CHECK(loaded.records[i].time == data.records[i].time);
    CHECK(loaded.records[i].event == data.records[i].event);
    CHECK(loaded.records[i].covariates == data.records[i].covariates);
  }
}
