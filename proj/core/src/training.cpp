#include "opsurv/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>

#include "opsurv/errors.hpp"
#include "opsurv/rng.hpp"

namespace opsurv {

namespace {

// One record's cached forward state plus gradient accumulators.
struct RecordState {
  ForwardTrace trace;
  CoefficientOutput out;
  std::vector<double> weight_norms;  // W per event row
  Matrix quad_basis;                 // order x (J+1), weighted rows at u_g(s)
  std::vector<double> point_row;     // weighted row at s itself
  std::vector<double> cdf_at_own;    // F_e(s) per event
  Matrix d_coeffs;
  std::vector<double> d_alphas;
};

// g_out[gamma] = dot(B[gamma], a); returns (t/2) * sum w_g * g^2 / (W + eps).
double quad_cdf_forward(const Matrix& basis, const QuadratureRule& rule,
                        double t, std::span<const double> row, double weight,
                        double* g_out) {
  double acc = 0.0;
  for (int g = 0; g < rule.order; ++g) {
    const double* br = basis.row(static_cast<std::size_t>(g));
    double dot = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) dot += br[j] * row[j];
    g_out[g] = dot;
    acc += rule.weights[static_cast<std::size_t>(g)] * dot * dot;
  }
  return 0.5 * t * acc / weight;
}

// d_row += upstream * dF/da for F as computed by quad_cdf_forward.
void quad_cdf_backward(const Matrix& basis, const QuadratureRule& rule,
                       double t, std::span<const double> row, double weight,
                       const double* g, double upstream, double* d_row) {
  const double denom = weight;
  double s2 = 0.0;
  const std::size_t len = row.size();
  // S1_j = sum_g w_g g_g B_gj accumulated into d_row with the prefactor.
  const double pref = upstream * t / denom;  // (t/2) * 2 / denom
  for (int gi = 0; gi < rule.order; ++gi) {
    const double* br = basis.row(static_cast<std::size_t>(gi));
    const double wg = rule.weights[static_cast<std::size_t>(gi)] * g[gi];
    s2 += wg * g[gi];
    for (std::size_t j = 0; j < len; ++j) d_row[j] += pref * wg * br[j];
  }
  const double corr = upstream * t * s2 / (denom * denom);
  for (std::size_t j = 0; j < len; ++j) d_row[j] -= corr * row[j];
}

double point_density_forward(std::span<const double> basis_row,
                             std::span<const double> row, double weight,
                             double* g_out) {
  double dot = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) dot += basis_row[j] * row[j];
  *g_out = dot;
  return dot * dot / weight;
}

void point_density_backward(std::span<const double> basis_row,
                            std::span<const double> row, double weight,
                            double g, double upstream, double* d_row) {
  const double denom = weight;
  const double a = upstream * 2.0 * g / denom;
  const double b = upstream * 2.0 * g * g / (denom * denom);
  for (std::size_t j = 0; j < row.size(); ++j) {
    d_row[j] += a * basis_row[j] - b * row[j];
  }
}

void check_finite(const Mlp& grad, const char* head) {
  for (std::size_t l = 0; l < grad.layers.size(); ++l) {
    for (double v : grad.layers[l].weights.data) {
      if (!std::isfinite(v)) {
        throw NumericError(std::string("non-finite gradient in ") + head +
                           " layer " + std::to_string(l) + " weights");
      }
    }
    for (double v : grad.layers[l].bias) {
      if (!std::isfinite(v)) {
        throw NumericError(std::string("non-finite gradient in ") + head +
                           " layer " + std::to_string(l) + " bias");
      }
    }
  }
}

void adam_update_arrays(std::vector<double>& p, const std::vector<double>& g,
                        std::vector<double>& m, std::vector<double>& v,
                        const TrainConfig& cfg, double bc1, double bc2) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
    v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon);
  }
}

void adam_update_mlp(Mlp& params, const Mlp& grads, Mlp& m, Mlp& v,
                     const TrainConfig& cfg, double bc1, double bc2) {
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    adam_update_arrays(params.layers[l].weights.data,
                       grads.layers[l].weights.data, m.layers[l].weights.data,
                       v.layers[l].weights.data, cfg, bc1, bc2);
    adam_update_arrays(params.layers[l].bias, grads.layers[l].bias,
                       m.layers[l].bias, v.layers[l].bias, cfg, bc1, bc2);
  }
}

}  // namespace

void validate(const TrainConfig& config) {
  if (config.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (config.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (config.learning_rate < 0.0) throw ConfigError("learning_rate must be >= 0");
  if (config.likelihood_weight < 0.0 || config.ranking_weight < 0.0) {
    throw ConfigError("loss weights must be nonnegative");
  }
  if (config.likelihood_weight + config.ranking_weight <= 0.0) {
    throw ConfigError("at least one loss weight must be positive");
  }
  if (config.ranking_weight > 0.0 && config.batch_size < 2) {
    throw ConfigError("ranking loss needs batch_size >= 2");
  }
}

double likelihood_event_term(double alpha_times_density) {
  return -std::log(std::max(alpha_times_density, kLogClamp));
}

double likelihood_censored_term(double one_minus_cif_sum) {
  return -std::log(std::max(one_minus_cif_sum, kLogClamp));
}

double ranking_pair_term(double cif_m, double cif_n) {
  return std::exp(-(cif_m - cif_n));
}

BatchEvaluation evaluate_batch(const ModelContext& ctx,
                               const NetworkParams& params,
                               std::span<const SurvivalRecord> batch,
                               const TrainConfig& config, bool want_gradients) {
  if (batch.empty()) throw ConfigError("batch must be nonempty");
  const int n_events = ctx.config.n_events;
  const std::size_t row_len = static_cast<std::size_t>(ctx.config.max_degree) + 1;
  const int order = ctx.rule.order;
  const double w_ll = config.likelihood_weight;
  const double w_rank = config.ranking_weight;

  BatchEvaluation eval;
  if (want_gradients) {
    eval.gradients.coeff_head = zeros_like(params.coeff_head);
    eval.gradients.alpha_head = zeros_like(params.alpha_head);
  }

  // Forward pass and per-record caches.
  std::vector<RecordState> states(batch.size());
  std::vector<double> g_buf(static_cast<std::size_t>(order));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const SurvivalRecord& rec = batch[i];
    if (rec.time < 0.0) throw DomainError("record time must be >= 0");
    if (rec.event < 0 || rec.event > n_events) {
      throw DomainError("record event label out of range");
    }
    RecordState& st = states[i];
    st.out = forward(ctx, params, rec.covariates,
                     want_gradients ? &st.trace : nullptr);
    st.weight_norms.resize(static_cast<std::size_t>(n_events));
    for (int e = 0; e < n_events; ++e) {
      st.weight_norms[static_cast<std::size_t>(e)] =
          normalizing_weight(st.out.event_row(e));
    }
    st.quad_basis = Matrix(static_cast<std::size_t>(order), row_len);
    const double half = 0.5 * rec.time;
    for (int g = 0; g < order; ++g) {
      const double u = half * (ctx.rule.nodes[static_cast<std::size_t>(g)] + 1.0);
      function_row_into(ctx.basis, u, st.quad_basis.row(static_cast<std::size_t>(g)));
    }
    st.point_row.resize(row_len);
    function_row_into(ctx.basis, rec.time, st.point_row.data());
    st.cdf_at_own.resize(static_cast<std::size_t>(n_events));
    for (int e = 0; e < n_events; ++e) {
      st.cdf_at_own[static_cast<std::size_t>(e)] = quad_cdf_forward(
          st.quad_basis, ctx.rule, rec.time, st.out.event_row(e),
          st.weight_norms[static_cast<std::size_t>(e)], g_buf.data());
    }
    if (want_gradients) {
      st.d_coeffs = Matrix(static_cast<std::size_t>(n_events), row_len);
      st.d_alphas.assign(static_cast<std::size_t>(n_events), 0.0);
    }
  }

  // Likelihood terms.
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const SurvivalRecord& rec = batch[i];
    RecordState& st = states[i];
    if (rec.event == 0) {
      double arg = 1.0;
      for (int e = 0; e < n_events; ++e) {
        arg -= st.out.alphas[static_cast<std::size_t>(e)] *
               st.cdf_at_own[static_cast<std::size_t>(e)];
      }
      eval.likelihood += likelihood_censored_term(arg);
      if (arg < kLogClamp) {
        ++eval.diagnostics.clamp_events;
      } else if (want_gradients && w_ll > 0.0) {
        for (int e = 0; e < n_events; ++e) {
          const std::size_t eu = static_cast<std::size_t>(e);
          st.d_alphas[eu] += w_ll * st.cdf_at_own[eu] / arg;
          const double up = w_ll * st.out.alphas[eu] / arg;
          quad_cdf_forward(st.quad_basis, ctx.rule, rec.time,
                           st.out.event_row(e), st.weight_norms[eu],
                           g_buf.data());
          quad_cdf_backward(st.quad_basis, ctx.rule, rec.time,
                            st.out.event_row(e), st.weight_norms[eu],
                            g_buf.data(), up, st.d_coeffs.row(eu));
        }
      }
    } else {
      const std::size_t eu = static_cast<std::size_t>(rec.event - 1);
      double g_pt = 0.0;
      const double f = point_density_forward(st.point_row, st.out.event_row(rec.event - 1),
                                             st.weight_norms[eu], &g_pt);
      const double af = st.out.alphas[eu] * f;
      eval.likelihood += likelihood_event_term(af);
      if (af < kLogClamp) {
        ++eval.diagnostics.clamp_events;
      } else if (want_gradients && w_ll > 0.0) {
        st.d_alphas[eu] -= w_ll / st.out.alphas[eu];
        point_density_backward(st.point_row, st.out.event_row(rec.event - 1),
                               st.weight_norms[eu], g_pt, -w_ll / f,
                               st.d_coeffs.row(eu));
      }
    }
  }

  // Ranking terms: admissible ordered pairs (m, n) with e_m != 0, s_m < s_n.
  for (std::size_t m = 0; m < batch.size(); ++m) {
    const SurvivalRecord& rm = batch[m];
    if (rm.event == 0) continue;
    RecordState& sm = states[m];
    const std::size_t eu = static_cast<std::size_t>(rm.event - 1);
    const double cif_m = sm.out.alphas[eu] * sm.cdf_at_own[eu];
    double dp_total = 0.0;
    for (std::size_t n = 0; n < batch.size(); ++n) {
      if (n == m || !(rm.time < batch[n].time)) continue;
      RecordState& sn = states[n];
      const double f_n =
          quad_cdf_forward(sm.quad_basis, ctx.rule, rm.time,
                           sn.out.event_row(rm.event - 1),
                           sn.weight_norms[eu], g_buf.data());
      const double cif_n = sn.out.alphas[eu] * f_n;
      const double v = ranking_pair_term(cif_m, cif_n);
      eval.ranking += v;
      ++eval.diagnostics.ranking_pairs;
      if (want_gradients && w_rank > 0.0) {
        const double dq = w_rank * v;  // d total / d cif_n
        sn.d_alphas[eu] += dq * f_n;
        quad_cdf_backward(sm.quad_basis, ctx.rule, rm.time,
                          sn.out.event_row(rm.event - 1), sn.weight_norms[eu],
                          g_buf.data(), dq * sn.out.alphas[eu],
                          sn.d_coeffs.row(eu));
        dp_total -= w_rank * v;  // d total / d cif_m accumulates over n
      }
    }
    if (want_gradients && dp_total != 0.0) {
      sm.d_alphas[eu] += dp_total * sm.cdf_at_own[eu];
      quad_cdf_forward(sm.quad_basis, ctx.rule, rm.time, sm.out.event_row(rm.event - 1),
                       sm.weight_norms[eu], g_buf.data());
      quad_cdf_backward(sm.quad_basis, ctx.rule, rm.time,
                        sm.out.event_row(rm.event - 1), sm.weight_norms[eu],
                        g_buf.data(), dp_total * sm.out.alphas[eu],
                        sm.d_coeffs.row(eu));
    }
  }

  eval.total = w_ll * eval.likelihood + w_rank * eval.ranking;

  if (want_gradients) {
    std::vector<double> d_logits(static_cast<std::size_t>(n_events));
    for (std::size_t i = 0; i < batch.size(); ++i) {
      RecordState& st = states[i];
      // Softmax backward: dl_k = a_k (dA_k - sum_j dA_j a_j).
      double inner = 0.0;
      for (int e = 0; e < n_events; ++e) {
        const std::size_t eu = static_cast<std::size_t>(e);
        inner += st.d_alphas[eu] * st.out.alphas[eu];
      }
      for (int e = 0; e < n_events; ++e) {
        const std::size_t eu = static_cast<std::size_t>(e);
        d_logits[eu] = st.out.alphas[eu] * (st.d_alphas[eu] - inner);
      }
      mlp_backward(params.alpha_head, batch[i].covariates, st.trace.alpha,
                   d_logits, eval.gradients.alpha_head);
      mlp_backward(params.coeff_head, batch[i].covariates, st.trace.coeff,
                   st.d_coeffs.data, eval.gradients.coeff_head);
    }
    check_finite(eval.gradients.coeff_head, "coeff_head");
    check_finite(eval.gradients.alpha_head, "alpha_head");
  }
  return eval;
}

double likelihood_loss(const ModelContext& ctx, const NetworkParams& params,
                       std::span<const SurvivalRecord> batch,
                       LossDiagnostics* diag) {
  TrainConfig cfg;
  cfg.likelihood_weight = 1.0;
  cfg.ranking_weight = 0.0;
  cfg.batch_size = static_cast<int>(batch.size());
  BatchEvaluation eval = evaluate_batch(ctx, params, batch, cfg, false);
  if (diag) {
    diag->clamp_events += eval.diagnostics.clamp_events;
    diag->ranking_pairs += eval.diagnostics.ranking_pairs;
  }
  return eval.likelihood;
}

double ranking_loss(const ModelContext& ctx, const NetworkParams& params,
                    std::span<const SurvivalRecord> batch,
                    LossDiagnostics* diag) {
  TrainConfig cfg;
  cfg.likelihood_weight = 0.0;
  cfg.ranking_weight = 1.0;
  cfg.batch_size = std::max<int>(2, static_cast<int>(batch.size()));
  BatchEvaluation eval = evaluate_batch(ctx, params, batch, cfg, false);
  if (diag) {
    diag->clamp_events += eval.diagnostics.clamp_events;
    diag->ranking_pairs += eval.diagnostics.ranking_pairs;
  }
  return eval.ranking;
}

double total_loss(const ModelContext& ctx, const NetworkParams& params,
                  std::span<const SurvivalRecord> batch,
                  const TrainConfig& config, LossDiagnostics* diag) {
  BatchEvaluation eval = evaluate_batch(ctx, params, batch, config, false);
  if (diag) {
    diag->clamp_events += eval.diagnostics.clamp_events;
    diag->ranking_pairs += eval.diagnostics.ranking_pairs;
  }
  return eval.total;
}

NetworkParams gradients(const ModelContext& ctx, const NetworkParams& params,
                        std::span<const SurvivalRecord> batch,
                        const TrainConfig& config) {
  return evaluate_batch(ctx, params, batch, config, true).gradients;
}

AdamState make_adam_state(const NetworkParams& params) {
  AdamState state;
  state.first_moment.coeff_head = zeros_like(params.coeff_head);
  state.first_moment.alpha_head = zeros_like(params.alpha_head);
  state.second_moment.coeff_head = zeros_like(params.coeff_head);
  state.second_moment.alpha_head = zeros_like(params.alpha_head);
  return state;
}

void adam_step(NetworkParams& params, const NetworkParams& grads,
               AdamState& state, const TrainConfig& config) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(config.adam_beta1, state.step);
  const double bc2 = 1.0 - std::pow(config.adam_beta2, state.step);
  adam_update_mlp(params.coeff_head, grads.coeff_head,
                  state.first_moment.coeff_head, state.second_moment.coeff_head,
                  config, bc1, bc2);
  adam_update_mlp(params.alpha_head, grads.alpha_head,
                  state.first_moment.alpha_head, state.second_moment.alpha_head,
                  config, bc1, bc2);
}

TrainResult train(const SplitDataset& data, const ModelConfig& model_config,
                  const TrainConfig& train_config) {
  validate(model_config);
  validate(train_config);
  if (data.train.empty()) throw ConfigError("training split is empty");
  if (data.train.front().covariates.size() !=
      static_cast<std::size_t>(model_config.n_features)) {
    throw ConfigError("model n_features does not match the dataset");
  }

  const ModelContext ctx = ModelContext::make(model_config);
  Rng rng(train_config.seed);
  NetworkParams params = init_params(model_config, rng);
  AdamState adam = make_adam_state(params);

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t bs = static_cast<std::size_t>(train_config.batch_size);
  std::vector<SurvivalRecord> batch;

  auto split_loss = [&](const std::vector<SurvivalRecord>& records) {
    double acc = 0.0;
    for (std::size_t start = 0; start < records.size(); start += bs) {
      const std::size_t stop = std::min(records.size(), start + bs);
      acc += total_loss(ctx, params,
                        std::span<const SurvivalRecord>(records.data() + start,
                                                        stop - start),
                        train_config);
    }
    return acc;
  };

  for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
    shuffle(order, rng);
    EpochLog log;
    log.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t stop = std::min(order.size(), start + bs);
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(data.train[order[k]]);
      BatchEvaluation eval =
          evaluate_batch(ctx, params, batch, train_config, true);
      adam_step(params, eval.gradients, adam, train_config);
      log.train_likelihood += eval.likelihood;
      log.train_ranking += eval.ranking;
      log.train_total += eval.total;
      result.clamp_events += eval.diagnostics.clamp_events;
    }
    log.val_total = data.validation.empty() ? log.train_total
                                            : split_loss(data.validation);
    result.log.push_back(log);
    if (log.val_total < best_val) {
      best_val = log.val_total;
      result.params = params;
      result.best_epoch = epoch;
    }
  }
  return result;
}

std::string loss_log_csv(std::span<const EpochLog> log) {
  std::string out = "epoch,train_total,train_ll,train_rank,val_total\n";
  char buf[160];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", row.epoch,
                  row.train_total, row.train_likelihood, row.train_ranking,
                  row.val_total);
    out += buf;
  }
  return out;
}

ModelConfig grad_check_default_config() {
  ModelConfig config;
  config.n_features = 3;
  config.n_events = 2;
  config.max_degree = 3;
  config.quad_order = 8;
  config.hidden_sizes = {2};
  return config;
}

GradCheckReport grad_check(const ModelConfig& config, std::uint64_t seed,
                           bool corrupt) {
  const ModelContext ctx = ModelContext::make(config);
  Rng rng(seed);
  NetworkParams params = init_params(config, rng);

  // Batch of 4 with a censored record and events of each kind.
  std::vector<SurvivalRecord> batch(4);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    batch[i].covariates.resize(static_cast<std::size_t>(config.n_features));
    for (double& c : batch[i].covariates) c = rng.normal();
    batch[i].time = rng.uniform(0.3, 3.5);
    batch[i].event = static_cast<int>(i % (static_cast<std::size_t>(config.n_events) + 1));
  }

  TrainConfig tcfg;
  tcfg.batch_size = static_cast<int>(batch.size());
  tcfg.seed = seed;

  NetworkParams grad = gradients(ctx, params, batch, tcfg);
  if (corrupt) {
    double* g0 = parameter_ptr(grad.coeff_head, 0);
    *g0 = *g0 * 1.01 + 1e-2;
  }

  const double h = 1e-5;
  GradCheckReport report;
  auto check_head = [&](Mlp& head, const Mlp& ghead) {
    const std::size_t count = parameter_count(head);
    for (std::size_t i = 0; i < count; ++i) {
      double* p = parameter_ptr(head, i);
      const double saved = *p;
      *p = saved + h;
      const double up = total_loss(ctx, params, batch, tcfg);
      *p = saved - h;
      const double down = total_loss(ctx, params, batch, tcfg);
      *p = saved;
      const double fd = (up - down) / (2.0 * h);
      const double ga = parameter_at(ghead, i);
      const double mag = std::max(std::fabs(ga), std::fabs(fd));
      if (mag <= 1e-8) continue;
      ++report.checked;
      const double diff = std::fabs(ga - fd);
      if (diff <= 1e-9) continue;  // below the central-difference noise floor
      report.max_rel_error = std::max(report.max_rel_error, diff / mag);
    }
  };
  check_head(params.coeff_head, grad.coeff_head);
  check_head(params.alpha_head, grad.alpha_head);
  report.pass = report.max_rel_error < 1e-4;
  return report;
}

}  // namespace opsurv
