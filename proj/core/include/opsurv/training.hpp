#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "opsurv/data.hpp"
#include "opsurv/model.hpp"

namespace opsurv {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 200;
  double learning_rate = 1e-3;
  double likelihood_weight = 1.0;
  double ranking_weight = 1.0;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

void validate(const TrainConfig& config);

/// Log arguments in the likelihood are clamped below at this value; clamped
/// terms contribute no gradient.
inline constexpr double kLogClamp = 1e-12;

struct LossDiagnostics {
  long clamp_events = 0;
  long ranking_pairs = 0;
};

/// Sum over the batch of -log(alpha_e * f_e(s|x)) for event records and
/// -log(1 - sum_e alpha_e F_e(s|x)) for censored ones.
double likelihood_loss(const ModelContext& ctx, const NetworkParams& params,
                       std::span<const SurvivalRecord> batch,
                       LossDiagnostics* diag = nullptr);

/// Pairwise exponential ranking penalty over admissible ordered pairs
/// (m, n): m had an event and s_m < s_n. Pairs are enumerated within the
/// given batch only.
double ranking_loss(const ModelContext& ctx, const NetworkParams& params,
                    std::span<const SurvivalRecord> batch,
                    LossDiagnostics* diag = nullptr);

double total_loss(const ModelContext& ctx, const NetworkParams& params,
                  std::span<const SurvivalRecord> batch,
                  const TrainConfig& config, LossDiagnostics* diag = nullptr);

/// Per-record contribution formulas, exposed for direct verification.
double likelihood_event_term(double alpha_times_density);
double likelihood_censored_term(double one_minus_cif_sum);
double ranking_pair_term(double cif_m, double cif_n);

struct BatchEvaluation {
  double likelihood = 0.0;
  double ranking = 0.0;
  double total = 0.0;
  LossDiagnostics diagnostics;
  NetworkParams gradients;  // same shapes as the evaluated params
};

/// Losses plus the exact reverse-mode gradient of the weighted total. The
/// quadrature is a fixed finite sum, so the chain rule runs through the
/// density values at the transformed nodes.
BatchEvaluation evaluate_batch(const ModelContext& ctx,
                               const NetworkParams& params,
                               std::span<const SurvivalRecord> batch,
                               const TrainConfig& config,
                               bool want_gradients);

NetworkParams gradients(const ModelContext& ctx, const NetworkParams& params,
                        std::span<const SurvivalRecord> batch,
                        const TrainConfig& config);

struct AdamState {
  NetworkParams first_moment;
  NetworkParams second_moment;
  long step = 0;
};

AdamState make_adam_state(const NetworkParams& params);

/// Standard Adam update with bias correction; deterministic.
void adam_step(NetworkParams& params, const NetworkParams& grads,
               AdamState& state, const TrainConfig& config);

struct EpochLog {
  int epoch = 0;  // 1-based
  double train_total = 0.0;
  double train_likelihood = 0.0;
  double train_ranking = 0.0;
  double val_total = 0.0;
};

struct TrainResult {
  NetworkParams params;  // best-validation snapshot
  std::vector<EpochLog> log;
  int best_epoch = 0;
  long clamp_events = 0;
};

/// Seeded-shuffle minibatch loop returning the parameters with the best
/// validation total loss.
TrainResult train(const SplitDataset& data, const ModelConfig& model_config,
                  const TrainConfig& train_config);

std::string loss_log_csv(std::span<const EpochLog> log);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  bool pass = false;
};

/// Compares the analytic gradient against central differences on a small
/// random instance. `corrupt` perturbs one analytic entry first and must
/// make the check fail; it exists as a negative control.
GradCheckReport grad_check(const ModelConfig& config, std::uint64_t seed,
                           bool corrupt = false);

/// The tiny default instance used by the gradcheck command.
ModelConfig grad_check_default_config();

}  // namespace opsurv
