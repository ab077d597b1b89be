#include "opsurv/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "opsurv/errors.hpp"
#include "opsurv/rng.hpp"

namespace opsurv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& cell, std::size_t line_no,
                    const std::string& column) {
  const std::string v = strip(cell);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw DataError("line " + std::to_string(line_no) + ": column '" + column +
                    "' has non-numeric cell '" + v + "'");
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

LoadedCsv load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = strip(h);

  std::size_t duration_col = header.size();
  std::size_t event_col = header.size();
  std::vector<std::size_t> feature_cols;
  LoadedCsv out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "duration") {
      duration_col = i;
    } else if (header[i] == "event") {
      event_col = i;
    } else {
      feature_cols.push_back(i);
      out.feature_names.push_back(header[i]);
    }
  }
  if (duration_col == header.size() || event_col == header.size()) {
    throw DataError("'" + path + "': header must contain 'duration' and 'event'");
  }
  if (feature_cols.empty()) {
    throw DataError("'" + path + "': no feature columns");
  }
  if (schema.expected_features >= 0 &&
      feature_cols.size() != static_cast<std::size_t>(schema.expected_features)) {
    throw DataError("'" + path + "' has " + std::to_string(feature_cols.size()) +
                    " feature columns, expected " +
                    std::to_string(schema.expected_features));
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": has " +
                      std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(header.size()));
    }
    SurvivalRecord rec;
    rec.time = parse_double(cells[duration_col], line_no, "duration");
    if (rec.time < 0.0) {
      throw DataError("line " + std::to_string(line_no) + ": negative duration");
    }
    double ev = parse_double(cells[event_col], line_no, "event");
    if (ev != std::floor(ev) || ev < 0.0 || ev > schema.n_events) {
      throw DataError("line " + std::to_string(line_no) + ": event label " +
                      strip(cells[event_col]) + " outside 0.." +
                      std::to_string(schema.n_events));
    }
    rec.event = static_cast<int>(ev);
    rec.covariates.reserve(feature_cols.size());
    for (std::size_t c : feature_cols) {
      rec.covariates.push_back(parse_double(cells[c], line_no, header[c]));
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

TimeScale fit_time_scale(std::span<const SurvivalRecord> records,
                         const QuadratureRule& rule) {
  double t_max = 0.0;
  for (const auto& r : records) t_max = std::max(t_max, r.time);
  if (t_max <= 0.0) {
    throw DataError("every observation time is zero; time scale is degenerate");
  }
  TimeScale scale;
  scale.t_max = t_max;
  scale.quad_order = rule.order;
  scale.top_node = rule.top_node();
  scale.factor = (1.0 / t_max) * (10.0 / (scale.top_node + 1.0));
  return scale;
}

void FeatureScaler::apply(std::vector<double>& covariates) const {
  for (std::size_t i = 0; i < covariates.size(); ++i) {
    covariates[i] = (covariates[i] - mean[i]) / stddev[i];
  }
}

FeatureScaler fit_feature_scaler(std::span<const SurvivalRecord> records) {
  if (records.empty()) throw DataError("cannot fit scaler on empty data");
  const std::size_t d = records.front().covariates.size();
  FeatureScaler scaler;
  scaler.mean.assign(d, 0.0);
  scaler.stddev.assign(d, 0.0);
  for (const auto& r : records) {
    for (std::size_t i = 0; i < d; ++i) scaler.mean[i] += r.covariates[i];
  }
  for (double& m : scaler.mean) m /= static_cast<double>(records.size());
  for (const auto& r : records) {
    for (std::size_t i = 0; i < d; ++i) {
      const double c = r.covariates[i] - scaler.mean[i];
      scaler.stddev[i] += c * c;
    }
  }
  for (double& s : scaler.stddev) {
    s = std::sqrt(s / static_cast<double>(records.size()));
    if (s == 0.0) s = 1.0;
  }
  return scaler;
}

SplitDataset split(std::span<const SurvivalRecord> records, std::uint64_t seed,
                   const QuadratureRule& rule) {
  const std::size_t n = records.size();
  if (n < 10) throw DataError("need at least 10 records to split");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(order, rng);

  const std::size_t n_train = static_cast<std::size_t>(0.64 * static_cast<double>(n));
  const std::size_t n_val = static_cast<std::size_t>(0.16 * static_cast<double>(n));

  SplitDataset out;
  out.train_indices.assign(order.begin(), order.begin() + n_train);
  out.validation_indices.assign(order.begin() + n_train,
                                order.begin() + n_train + n_val);
  out.test_indices.assign(order.begin() + n_train + n_val, order.end());

  auto collect = [&](const std::vector<std::size_t>& idx) {
    std::vector<SurvivalRecord> recs;
    recs.reserve(idx.size());
    for (std::size_t i : idx) recs.push_back(records[i]);
    return recs;
  };
  out.train = collect(out.train_indices);
  out.validation = collect(out.validation_indices);
  out.test = collect(out.test_indices);

  out.scale = fit_time_scale(out.train, rule);
  out.scaler = fit_feature_scaler(out.train);

  auto transform = [&](std::vector<SurvivalRecord>& recs, bool count_overflow) {
    for (auto& r : recs) {
      if (count_overflow && r.time > out.scale.t_max) ++out.n_beyond_train_window;
      r.time = out.scale.scaled(r.time);
      out.scaler.apply(r.covariates);
    }
  };
  transform(out.train, false);
  transform(out.validation, true);
  transform(out.test, true);
  return out;
}

std::vector<std::vector<double>> synthetic_betas(int n_features, int n_events) {
  // Published base pattern, cycled across features; the second cause gets
  // the negated pattern so the two risks order subjects oppositely.
  static const double base[4] = {1.6, -1.28, 0.8, -0.48};
  std::vector<std::vector<double>> betas;
  for (int e = 0; e < n_events; ++e) {
    std::vector<double> beta(static_cast<std::size_t>(n_features));
    const double sign = (e % 2 == 0) ? 1.0 : -1.0;
    for (int k = 0; k < n_features; ++k) beta[k] = sign * base[k % 4];
    betas.push_back(std::move(beta));
  }
  return betas;
}

double SyntheticTruth::cif(std::span<const double> covariates, int event_index,
                           double raw_time) const {
  double total_rate = 0.0;
  double event_rate = 0.0;
  for (std::size_t e = 0; e < betas.size(); ++e) {
    double dot = 0.0;
    for (std::size_t k = 0; k < covariates.size(); ++k) {
      dot += betas[e][k] * covariates[k];
    }
    const double rate = std::exp(dot);
    total_rate += rate;
    if (e == static_cast<std::size_t>(event_index)) event_rate = rate;
  }
  return (event_rate / total_rate) * (1.0 - std::exp(-total_rate * raw_time));
}

SyntheticData generate_synthetic(int n, int n_features, int n_events,
                                 std::uint64_t seed, double censor_rate) {
  if (n_events != 1 && n_events != 2) {
    throw ConfigError("synthetic generator supports 1 or 2 events");
  }
  if (censor_rate < 0.0 || censor_rate > 0.9) {
    throw ConfigError("censor_rate must be in [0, 0.9]");
  }
  if (n <= 0 || n_features <= 0) {
    throw ConfigError("n and n_features must be positive");
  }

  Rng rng(seed);
  SyntheticData out;
  out.truth.betas = synthetic_betas(n_features, n_events);

  std::vector<double> latent_min(static_cast<std::size_t>(n));
  std::vector<int> latent_cause(static_cast<std::size_t>(n));
  out.records.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    SurvivalRecord& rec = out.records[static_cast<std::size_t>(i)];
    rec.covariates.resize(static_cast<std::size_t>(n_features));
    for (double& c : rec.covariates) c = rng.normal();

    double best_time = 0.0;
    int best_cause = 0;
    for (int e = 0; e < n_events; ++e) {
      double dot = 0.0;
      for (int k = 0; k < n_features; ++k) {
        dot += out.truth.betas[static_cast<std::size_t>(e)][static_cast<std::size_t>(k)] *
               rec.covariates[static_cast<std::size_t>(k)];
      }
      const double rate = std::exp(dot);
      double u = rng.uniform01();
      while (u <= 0.0) u = rng.uniform01();
      const double t = -std::log(u) / rate;
      if (e == 0 || t < best_time) {
        best_time = t;
        best_cause = e + 1;
      }
    }
    latent_min[static_cast<std::size_t>(i)] = best_time;
    latent_cause[static_cast<std::size_t>(i)] = best_cause;
    rec.time = best_time;
    rec.event = best_cause;
  }

  if (censor_rate > 0.0) {
    // With C ~ U(0, c), the expected censored fraction is E[min(T/c, 1)],
    // decreasing in c; bisect in log space on the sampled latent times.
    auto censored_fraction = [&](double c) {
      double acc = 0.0;
      for (double t : latent_min) acc += std::min(t / c, 1.0);
      return acc / static_cast<double>(n);
    };
    double lo = 1e-9, hi = 1e9;
    for (int it = 0; it < 200; ++it) {
      const double mid = std::sqrt(lo * hi);
      if (censored_fraction(mid) > censor_rate) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    out.truth.censor_max = std::sqrt(lo * hi);
    for (int i = 0; i < n; ++i) {
      SurvivalRecord& rec = out.records[static_cast<std::size_t>(i)];
      const double c = rng.uniform(0.0, out.truth.censor_max);
      if (c < latent_min[static_cast<std::size_t>(i)]) {
        rec.time = c;
        rec.event = 0;
      }
    }
  }
  return out;
}

std::string records_to_csv(std::span<const SurvivalRecord> records) {
  std::string out = "duration,event";
  const std::size_t d = records.empty() ? 0 : records.front().covariates.size();
  for (std::size_t k = 0; k < d; ++k) out += ",x" + std::to_string(k);
  out += "\n";
  for (const auto& r : records) {
    out += format_double(r.time);
    out += ',';
    out += std::to_string(r.event);
    for (double c : r.covariates) {
      out += ',';
      out += format_double(c);
    }
    out += '\n';
  }
  return out;
}

}  // namespace opsurv
