#include "opsurv/model.hpp"

#include <cmath>
#include <string>

#include "opsurv/errors.hpp"

namespace opsurv {

void validate(const ModelConfig& config) {
  if (config.n_features <= 0) throw ConfigError("n_features must be positive");
  if (config.n_events < 1) throw ConfigError("n_events must be >= 1");
  if (config.max_degree < 0 || config.max_degree > kMaxHermiteDegree) {
    throw ConfigError("max_degree must be in [0, " +
                      std::to_string(kMaxHermiteDegree) + "]");
  }
  if (config.quad_order < 1 || config.quad_order > kMaxQuadratureOrder) {
    throw ConfigError("quad_order must be in [1, " +
                      std::to_string(kMaxQuadratureOrder) + "]");
  }
  for (int h : config.hidden_sizes) {
    if (h <= 0) throw ConfigError("hidden sizes must be positive");
  }
}

ModelContext ModelContext::make(const ModelConfig& config) {
  validate(config);
  ModelContext ctx;
  ctx.config = config;
  ctx.basis = BasisSpec{config.max_degree};
  ctx.rule = build_rule(config.quad_order);
  return ctx;
}

NetworkParams init_params(const ModelConfig& config, Rng& rng) {
  validate(config);
  const std::size_t n_coeff = static_cast<std::size_t>(config.n_events) *
                              (static_cast<std::size_t>(config.max_degree) + 1);
  NetworkParams params;
  params.coeff_head = make_mlp(static_cast<std::size_t>(config.n_features),
                               config.hidden_sizes, n_coeff);
  params.alpha_head = make_mlp(static_cast<std::size_t>(config.n_features),
                               config.hidden_sizes,
                               static_cast<std::size_t>(config.n_events));
  init_uniform(params.coeff_head, rng);
  init_uniform(params.alpha_head, rng);

  // Degree-0 bias 1, all other output biases 0.
  DenseLayer& out = params.coeff_head.layers.back();
  const std::size_t row_len = static_cast<std::size_t>(config.max_degree) + 1;
  for (std::size_t i = 0; i < out.bias.size(); ++i) {
    out.bias[i] = (i % row_len == 0) ? 1.0 : 0.0;
  }
  return params;
}

CoefficientOutput forward(const ModelContext& ctx, const NetworkParams& params,
                          std::span<const double> x, ForwardTrace* trace) {
  if (x.size() != static_cast<std::size_t>(ctx.config.n_features)) {
    throw ConfigError("feature vector has " + std::to_string(x.size()) +
                      " entries, model expects " +
                      std::to_string(ctx.config.n_features));
  }
  const std::size_t n_events = static_cast<std::size_t>(ctx.config.n_events);
  const std::size_t row_len = static_cast<std::size_t>(ctx.config.max_degree) + 1;

  std::vector<double> flat =
      mlp_forward(params.coeff_head, x, trace ? &trace->coeff : nullptr);
  std::vector<double> logits =
      mlp_forward(params.alpha_head, x, trace ? &trace->alpha : nullptr);
  if (trace) trace->alpha_logits = logits;

  CoefficientOutput out;
  out.coeffs = Matrix(n_events, row_len);
  out.coeffs.data = std::move(flat);

  // Stabilized softmax.
  double max_logit = logits[0];
  for (double v : logits) max_logit = std::max(max_logit, v);
  out.alphas.resize(n_events);
  double denom = 0.0;
  for (std::size_t e = 0; e < n_events; ++e) {
    out.alphas[e] = std::exp(logits[e] - max_logit);
    denom += out.alphas[e];
  }
  for (double& a : out.alphas) a /= denom;

  for (std::size_t e = 0; e < n_events; ++e) {
    double norm2 = normalizing_weight(out.event_row(static_cast<int>(e)));
    if (!(norm2 > 1e-12)) {  // |a_e| > 1e-6
      throw NumericError("coefficient row for event " + std::to_string(e + 1) +
                         " collapsed to ~0");
    }
  }
  return out;
}

double normalizing_weight(std::span<const double> coeff_row) {
  double acc = 0.0;
  for (double a : coeff_row) acc += a * a;
  return acc;
}

double density(const BasisSpec& basis, std::span<const double> coeff_row,
               double t) {
  if (coeff_row.size() != static_cast<std::size_t>(basis.max_degree) + 1) {
    throw DomainError("coefficient row length does not match basis degree");
  }
  const double w = normalizing_weight(coeff_row);
  if (w == 0.0) {
    throw NumericError("density undefined for an all-zero coefficient row");
  }
  // Work with the weighted basis h_j(t)e^{-t^2/2} so the squared sum already
  // carries e^{-t^2}; keeps large |t| finite.
  double row[kMaxHermiteDegree + 1];
  function_row_into(basis, t, row);
  double g = 0.0;
  for (std::size_t j = 0; j < coeff_row.size(); ++j) g += coeff_row[j] * row[j];
  return g * g / w;
}

double cdf(const ModelContext& ctx, std::span<const double> coeff_row,
           double t) {
  return antiderivative_at(
      ctx.rule, [&](double u) { return density(ctx.basis, coeff_row, u); }, t);
}

double cif(const ModelContext& ctx, const CoefficientOutput& out,
           int event_index, double t) {
  if (event_index < 0 || event_index >= ctx.config.n_events) {
    throw DomainError("event index out of range: " +
                      std::to_string(event_index));
  }
  return out.alphas[static_cast<std::size_t>(event_index)] *
         cdf(ctx, out.event_row(event_index), t);
}

double survival(const ModelContext& ctx, const CoefficientOutput& out,
                double t) {
  double acc = 1.0;
  for (int e = 0; e < ctx.config.n_events; ++e) acc -= cif(ctx, out, e, t);
  return acc;
}

double hazard(const ModelContext& ctx, const CoefficientOutput& out, double t) {
  const double s = survival(ctx, out, t);
  if (s <= kSurvivalFloor) {
    throw NumericError("hazard undefined: survival fell to " +
                       std::to_string(s));
  }
  double num = 0.0;
  for (int e = 0; e < ctx.config.n_events; ++e) {
    num += out.alphas[static_cast<std::size_t>(e)] *
           density(ctx.basis, out.event_row(e), t);
  }
  return num / s;
}

}  // namespace opsurv
