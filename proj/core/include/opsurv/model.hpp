#pragma once

#include <span>
#include <vector>

#include "opsurv/hermite.hpp"
#include "opsurv/nn.hpp"
#include "opsurv/quadrature.hpp"
#include "opsurv/rng.hpp"

namespace opsurv {

struct ModelConfig {
  int n_features = 0;
  int n_events = 1;
  int max_degree = 8;
  int quad_order = 20;
  std::vector<int> hidden_sizes = {32, 32};
};

void validate(const ModelConfig& config);

/// The trainable state: a coefficient head emitting n_events * (max_degree+1)
/// values and a weight head emitting n_events logits.
struct NetworkParams {
  Mlp coeff_head;
  Mlp alpha_head;
};

/// Per-record network output: one coefficient row per event plus softmax
/// event weights (positive, summing to 1).
struct CoefficientOutput {
  Matrix coeffs;               // n_events x (max_degree + 1)
  std::vector<double> alphas;  // n_events

  std::span<const double> event_row(int event_index) const {
    return {coeffs.row(static_cast<std::size_t>(event_index)), coeffs.cols};
  }
};

/// Immutable evaluation context shared by model, training and CLI code:
/// the configuration plus the basis and quadrature rule derived from it.
struct ModelContext {
  ModelConfig config;
  BasisSpec basis;
  QuadratureRule rule;

  static ModelContext make(const ModelConfig& config);
};

/// Fresh parameters: hidden layers uniform(+-1/sqrt(fan_in)); the coefficient
/// output layer starts every density at the degree-0 basis squared (bias 1 on
/// each event's degree-0 slot) so the normalizing weight starts well above 0.
NetworkParams init_params(const ModelConfig& config, Rng& rng);

/// Captured intermediates of one forward call, for the backward pass.
struct ForwardTrace {
  MlpTrace coeff;
  MlpTrace alpha;
  std::vector<double> alpha_logits;
};

CoefficientOutput forward(const ModelContext& ctx, const NetworkParams& params,
                          std::span<const double> x,
                          ForwardTrace* trace = nullptr);

/// sum_j a_j^2 for one event's coefficient row.
double normalizing_weight(std::span<const double> coeff_row);

/// Density value (sum_j a_j h_j(t))^2 e^{-t^2} / W(a) at a scaled time.
/// The ratio is bounded by sum_j phi_j(t)^2 for any nonzero row, so the only
/// degenerate input is the all-zero row, which is rejected.
double density(const BasisSpec& basis, std::span<const double> coeff_row,
               double t);

/// CDF via the [0, t] quadrature transform of the density; exactly 0 at t=0.
double cdf(const ModelContext& ctx, std::span<const double> coeff_row,
           double t);

/// alpha_e * F_e(t); event_index is 0-based (record labels use 1-based
/// event codes with 0 = censored).
double cif(const ModelContext& ctx, const CoefficientOutput& out,
           int event_index, double t);

/// 1 - sum_e cif_e(t).
double survival(const ModelContext& ctx, const CoefficientOutput& out,
                double t);

inline constexpr double kSurvivalFloor = 1e-9;

/// sum_e alpha_e f_e(t) / survival(t); the analytic derivative of -log S.
double hazard(const ModelContext& ctx, const CoefficientOutput& out, double t);

}  // namespace opsurv
