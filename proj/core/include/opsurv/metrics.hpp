#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "opsurv/data.hpp"

namespace opsurv {

/// Product-limit step function. `survival[i]` is the value at and after
/// `times[i]`; before the first time the curve is 1.
struct KaplanMeierCurve {
  std::vector<double> times;
  std::vector<double> survival;

  double at(double t) const;      // right-continuous S(t)
  double before(double t) const;  // left limit S(t-)
};

/// flags[i] == 1 marks the event the curve estimates (pass censoring
/// indicators to get the censoring-survival curve used for IPCW).
KaplanMeierCurve km_estimate(std::span<const double> times,
                             std::span<const int> flags);

/// Concordant fraction over pairs (i, j) where i had the event and
/// s_i < s_j; tied risk scores count 1/2.
double harrell_c_index(std::span<const double> risk_scores,
                       std::span<const double> times,
                       std::span<const int> event_flags);

/// CIF supplier for metric computations: record index (into the records
/// span), 0-based event index, scaled time.
using CifFn = std::function<double(std::size_t, int, double)>;

/// Time-dependent concordance for one event: pairs are (m, n) with
/// e_m == event, s_m <= horizon, s_n > s_m; concordant when the CIF at s_m
/// ranks m above n. `event_index` is 0-based.
double td_c_index(const CifFn& cif, std::span<const SurvivalRecord> records,
                  int event_index, double horizon);

/// IPCW Brier score for one event at `horizon`. `censor_km` must be fitted
/// on censoring indicators. Records censored before the horizon get weight
/// zero; everyone stays in the denominator.
double brier_at(const CifFn& cif, std::span<const SurvivalRecord> records,
                int event_index, double horizon,
                const KaplanMeierCurve& censor_km);

/// Trapezoid average of brier_at over the grid, normalized by its span.
double integrated_brier(const CifFn& cif,
                        std::span<const SurvivalRecord> records,
                        int event_index, std::span<const double> grid,
                        const KaplanMeierCurve& censor_km);

/// Nearest-rank empirical quantile over uncensored event times.
double event_time_quantile(std::span<const SurvivalRecord> records, double q);

struct EventMetrics {
  double td_c_index = 0.0;
  double td_c_q25 = 0.0;
  double td_c_q50 = 0.0;
  double td_c_q75 = 0.0;
  double brier_q25 = 0.0;
  double brier_q50 = 0.0;
  double brier_q75 = 0.0;
  double integrated_brier = 0.0;
};

struct MetricsReport {
  std::vector<EventMetrics> per_event;
  double q25_time = 0.0;
  double q50_time = 0.0;
  double q75_time = 0.0;
};

struct MetricsOptions {
  int ibs_grid_points = 100;
};

/// Full per-event report: global and quantile-horizon td-C, quantile Brier
/// scores, and the integrated Brier score over a grid between the 1st and
/// 99th percentiles of observed times.
MetricsReport compute_metrics(const CifFn& cif,
                              std::span<const SurvivalRecord> records,
                              int n_events,
                              const MetricsOptions& options = {});

std::string metrics_report_csv(const MetricsReport& report);
std::string metrics_report_table(const MetricsReport& report);

}  // namespace opsurv
