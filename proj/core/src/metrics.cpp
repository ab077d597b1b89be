#include "opsurv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "opsurv/errors.hpp"

namespace opsurv {

double KaplanMeierCurve::at(double t) const {
  // Last index with times[i] <= t.
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 1.0;
  return survival[static_cast<std::size_t>(it - times.begin()) - 1];
}

double KaplanMeierCurve::before(double t) const {
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 1.0;
  return survival[static_cast<std::size_t>(it - times.begin()) - 1];
}

KaplanMeierCurve km_estimate(std::span<const double> times,
                             std::span<const int> flags) {
  if (times.empty() || times.size() != flags.size()) {
    throw DataError("km_estimate needs matching nonempty inputs");
  }
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  KaplanMeierCurve curve;
  double value = 1.0;
  std::size_t at_risk = times.size();
  std::size_t i = 0;
  while (i < order.size()) {
    const double t = times[order[i]];
    std::size_t events = 0;
    std::size_t leaving = 0;
    while (i < order.size() && times[order[i]] == t) {
      events += flags[order[i]] != 0 ? 1u : 0u;
      ++leaving;
      ++i;
    }
    if (events > 0) {
      value *= 1.0 - static_cast<double>(events) / static_cast<double>(at_risk);
      curve.times.push_back(t);
      curve.survival.push_back(value);
    }
    at_risk -= leaving;
  }
  return curve;
}

double harrell_c_index(std::span<const double> risk_scores,
                       std::span<const double> times,
                       std::span<const int> event_flags) {
  if (risk_scores.size() != times.size() || times.size() != event_flags.size()) {
    throw DataError("harrell_c_index needs equal-length inputs");
  }
  double concordant = 0.0;
  long comparable = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (event_flags[i] == 0) continue;
    for (std::size_t j = 0; j < times.size(); ++j) {
      if (!(times[i] < times[j])) continue;
      ++comparable;
      if (risk_scores[i] > risk_scores[j]) {
        concordant += 1.0;
      } else if (risk_scores[i] == risk_scores[j]) {
        concordant += 0.5;
      }
    }
  }
  if (comparable == 0) {
    throw NumericError("c-index undefined: no comparable pairs");
  }
  return concordant / static_cast<double>(comparable);
}

double td_c_index(const CifFn& cif, std::span<const SurvivalRecord> records,
                  int event_index, double horizon) {
  double concordant = 0.0;
  long comparable = 0;
  for (std::size_t m = 0; m < records.size(); ++m) {
    if (records[m].event != event_index + 1) continue;
    if (records[m].time > horizon) continue;
    const double risk_m = cif(m, event_index, records[m].time);
    for (std::size_t n = 0; n < records.size(); ++n) {
      if (!(records[m].time < records[n].time)) continue;
      ++comparable;
      const double risk_n = cif(n, event_index, records[m].time);
      if (risk_m > risk_n) {
        concordant += 1.0;
      } else if (risk_m == risk_n) {
        concordant += 0.5;
      }
    }
  }
  if (comparable == 0) {
    throw NumericError("td-c-index undefined: no comparable pairs");
  }
  return concordant / static_cast<double>(comparable);
}

double brier_at(const CifFn& cif, std::span<const SurvivalRecord> records,
                int event_index, double horizon,
                const KaplanMeierCurve& censor_km) {
  if (records.empty()) throw DataError("brier_at needs records");
  double acc = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const SurvivalRecord& rec = records[i];
    double weight = 0.0;
    double outcome = 0.0;
    if (rec.time <= horizon && rec.event != 0) {
      const double g = censor_km.before(rec.time);
      if (g <= 0.0) {
        throw NumericError("brier score undefined: censoring survival is 0 "
                           "before an event time");
      }
      weight = 1.0 / g;
      outcome = rec.event == event_index + 1 ? 1.0 : 0.0;
    } else if (rec.time > horizon) {
      const double g = censor_km.at(horizon);
      if (g <= 0.0) {
        throw NumericError("brier score undefined: censoring survival is 0 "
                           "at the horizon");
      }
      weight = 1.0 / g;
      outcome = 0.0;
    }
    // Censored at or before the horizon: weight stays 0.
    if (weight > 0.0) {
      const double p = cif(i, event_index, horizon);
      acc += weight * (outcome - p) * (outcome - p);
    }
  }
  return acc / static_cast<double>(records.size());
}

double integrated_brier(const CifFn& cif,
                        std::span<const SurvivalRecord> records,
                        int event_index, std::span<const double> grid,
                        const KaplanMeierCurve& censor_km) {
  if (grid.size() < 2) throw DataError("integrated_brier needs >= 2 grid points");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw DataError("integrated_brier grid must be strictly increasing");
    }
  }
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = brier_at(cif, records, event_index, grid[i], censor_km);
  }
  double area = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    area += 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
  }
  return area / (grid.back() - grid.front());
}

double event_time_quantile(std::span<const SurvivalRecord> records, double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile q must be in (0, 1)");
  std::vector<double> times;
  for (const auto& r : records) {
    if (r.event != 0) times.push_back(r.time);
  }
  if (times.empty()) {
    throw DataError("no uncensored records; quantile undefined");
  }
  std::sort(times.begin(), times.end());
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(times.size())));
  return times[std::max<std::size_t>(rank, 1) - 1];
}

MetricsReport compute_metrics(const CifFn& cif,
                              std::span<const SurvivalRecord> records,
                              int n_events, const MetricsOptions& options) {
  if (records.empty()) throw DataError("compute_metrics needs records");
  MetricsReport report;
  report.q25_time = event_time_quantile(records, 0.25);
  report.q50_time = event_time_quantile(records, 0.50);
  report.q75_time = event_time_quantile(records, 0.75);

  std::vector<double> obs_times;
  std::vector<int> censor_flags;
  obs_times.reserve(records.size());
  for (const auto& r : records) {
    obs_times.push_back(r.time);
    censor_flags.push_back(r.event == 0 ? 1 : 0);
  }
  const KaplanMeierCurve censor_km = km_estimate(obs_times, censor_flags);

  // Grid between the 1st and 99th percentile of observed times.
  std::vector<double> sorted_times = obs_times;
  std::sort(sorted_times.begin(), sorted_times.end());
  auto percentile = [&](double p) {
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(p * static_cast<double>(sorted_times.size())));
    return sorted_times[std::max<std::size_t>(rank, 1) - 1];
  };
  const double lo = percentile(0.01);
  const double hi = percentile(0.99);
  if (!(hi > lo)) throw DataError("observed times too degenerate for a grid");
  const int n_grid = std::max(2, options.ibs_grid_points);
  std::vector<double> grid(static_cast<std::size_t>(n_grid));
  for (int i = 0; i < n_grid; ++i) {
    grid[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_grid - 1);
  }

  // A metric can be undefined for one event at one horizon (say, no early
  // events of that cause); report NaN there instead of aborting the rest.
  auto guarded = [](auto&& compute) {
    try {
      return compute();
    } catch (const NumericError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  const double inf = std::numeric_limits<double>::infinity();
  for (int e = 0; e < n_events; ++e) {
    EventMetrics em;
    em.td_c_index = guarded([&] { return td_c_index(cif, records, e, inf); });
    em.td_c_q25 =
        guarded([&] { return td_c_index(cif, records, e, report.q25_time); });
    em.td_c_q50 =
        guarded([&] { return td_c_index(cif, records, e, report.q50_time); });
    em.td_c_q75 =
        guarded([&] { return td_c_index(cif, records, e, report.q75_time); });
    em.brier_q25 = guarded(
        [&] { return brier_at(cif, records, e, report.q25_time, censor_km); });
    em.brier_q50 = guarded(
        [&] { return brier_at(cif, records, e, report.q50_time, censor_km); });
    em.brier_q75 = guarded(
        [&] { return brier_at(cif, records, e, report.q75_time, censor_km); });
    em.integrated_brier = guarded(
        [&] { return integrated_brier(cif, records, e, grid, censor_km); });
    report.per_event.push_back(em);
  }
  return report;
}

std::string metrics_report_csv(const MetricsReport& report) {
  std::string out =
      "event,td_c_index,integrated_brier,td_c_q25,td_c_q50,td_c_q75,"
      "brier_q25,brier_q50,brier_q75\n";
  char buf[320];
  for (std::size_t e = 0; e < report.per_event.size(); ++e) {
    const EventMetrics& em = report.per_event[e];
    std::snprintf(buf, sizeof(buf),
                  "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  e + 1, em.td_c_index, em.integrated_brier, em.td_c_q25,
                  em.td_c_q50, em.td_c_q75, em.brier_q25, em.brier_q50,
                  em.brier_q75);
    out += buf;
  }
  return out;
}

std::string metrics_report_table(const MetricsReport& report) {
  std::string out;
  char buf[400];
  std::snprintf(buf, sizeof(buf),
                "%-6s %-11s %-22s %-16s %-16s %-16s %-17s %-17s %-17s\n",
                "Event", "td-C Index", "Integrated Brier Score",
                "td-C Index 25th", "td-C Index 50th", "td-C Index 75th",
                "Brier Score 25th", "Brier Score 50th", "Brier Score 75th");
  out += buf;
  for (std::size_t e = 0; e < report.per_event.size(); ++e) {
    const EventMetrics& em = report.per_event[e];
    std::snprintf(buf, sizeof(buf),
                  "%-6zu %-11.3f %-22.3f %-16.3f %-16.3f %-16.3f %-17.3f "
                  "%-17.3f %-17.3f\n",
                  e + 1, em.td_c_index, em.integrated_brier, em.td_c_q25,
                  em.td_c_q50, em.td_c_q75, em.brier_q25, em.brier_q50,
                  em.brier_q75);
    out += buf;
  }
  return out;
}

}  // namespace opsurv
