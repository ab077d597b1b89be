#include "opsurv/nn.hpp"

#include <cmath>
#include <string>

#include "opsurv/errors.hpp"

namespace opsurv {

Mlp make_mlp(std::size_t in, const std::vector<int>& hidden, std::size_t out) {
  for (int h : hidden) {
    if (h <= 0) throw ConfigError("hidden layer size must be positive");
  }
  if (in == 0 || out == 0) throw ConfigError("mlp needs nonzero in/out sizes");
  Mlp mlp;
  std::size_t prev = in;
  for (int h : hidden) {
    DenseLayer layer;
    layer.weights = Matrix(static_cast<std::size_t>(h), prev);
    layer.bias.assign(static_cast<std::size_t>(h), 0.0);
    mlp.layers.push_back(std::move(layer));
    prev = static_cast<std::size_t>(h);
  }
  DenseLayer last;
  last.weights = Matrix(out, prev);
  last.bias.assign(out, 0.0);
  mlp.layers.push_back(std::move(last));
  return mlp;
}

void init_uniform(Mlp& mlp, Rng& rng) {
  for (auto& layer : mlp.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weights.cols));
    for (double& w : layer.weights.data) w = rng.uniform(-bound, bound);
    for (double& b : layer.bias) b = rng.uniform(-bound, bound);
  }
}

std::vector<double> mlp_forward(const Mlp& mlp, std::span<const double> x,
                                MlpTrace* trace) {
  if (x.size() != mlp.input_size()) {
    throw ConfigError("mlp input size mismatch: got " +
                      std::to_string(x.size()) + ", expected " +
                      std::to_string(mlp.input_size()));
  }
  if (trace) {
    trace->pre.assign(mlp.layers.size(), {});
    trace->post.assign(mlp.layers.size(), {});
  }
  std::vector<double> act(x.begin(), x.end());
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    const DenseLayer& layer = mlp.layers[l];
    std::vector<double> z(layer.weights.rows);
    for (std::size_t r = 0; r < layer.weights.rows; ++r) {
      const double* wr = layer.weights.row(r);
      double acc = layer.bias[r];
      for (std::size_t c = 0; c < layer.weights.cols; ++c) acc += wr[c] * act[c];
      z[r] = acc;
    }
    const bool last = (l + 1 == mlp.layers.size());
    if (trace) trace->pre[l] = z;
    if (!last) {
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    }
    if (trace) trace->post[l] = z;
    act = std::move(z);
  }
  return act;
}

void mlp_backward(const Mlp& mlp, std::span<const double> x,
                  const MlpTrace& trace, std::span<const double> d_out,
                  Mlp& grad) {
  std::vector<double> delta(d_out.begin(), d_out.end());
  for (std::size_t li = mlp.layers.size(); li-- > 0;) {
    const DenseLayer& layer = mlp.layers[li];
    const bool last = (li + 1 == mlp.layers.size());
    if (!last) {
      // ReLU gate on this layer's pre-activation.
      for (std::size_t r = 0; r < delta.size(); ++r) {
        if (trace.pre[li][r] <= 0.0) delta[r] = 0.0;
      }
    }
    const std::vector<double>* input_ptr = nullptr;
    std::vector<double> input_copy;
    if (li == 0) {
      input_copy.assign(x.begin(), x.end());
      input_ptr = &input_copy;
    } else {
      input_ptr = &trace.post[li - 1];
    }
    const std::vector<double>& input = *input_ptr;

    DenseLayer& glayer = grad.layers[li];
    for (std::size_t r = 0; r < layer.weights.rows; ++r) {
      glayer.bias[r] += delta[r];
      double* gw = glayer.weights.row(r);
      const double d = delta[r];
      for (std::size_t c = 0; c < layer.weights.cols; ++c) gw[c] += d * input[c];
    }
    if (li == 0) break;
    std::vector<double> next(layer.weights.cols, 0.0);
    for (std::size_t r = 0; r < layer.weights.rows; ++r) {
      const double* wr = layer.weights.row(r);
      const double d = delta[r];
      for (std::size_t c = 0; c < layer.weights.cols; ++c) next[c] += d * wr[c];
    }
    delta = std::move(next);
  }
}

Mlp zeros_like(const Mlp& mlp) {
  Mlp out;
  out.layers.reserve(mlp.layers.size());
  for (const auto& layer : mlp.layers) {
    DenseLayer z;
    z.weights = Matrix(layer.weights.rows, layer.weights.cols);
    z.bias.assign(layer.bias.size(), 0.0);
    out.layers.push_back(std::move(z));
  }
  return out;
}

void scale_in_place(Mlp& mlp, double factor) {
  for (auto& layer : mlp.layers) {
    for (double& w : layer.weights.data) w *= factor;
    for (double& b : layer.bias) b *= factor;
  }
}

void add_scaled(Mlp& dst, const Mlp& src, double factor) {
  for (std::size_t l = 0; l < dst.layers.size(); ++l) {
    auto& d = dst.layers[l];
    const auto& s = src.layers[l];
    for (std::size_t i = 0; i < d.weights.data.size(); ++i) {
      d.weights.data[i] += factor * s.weights.data[i];
    }
    for (std::size_t i = 0; i < d.bias.size(); ++i) d.bias[i] += factor * s.bias[i];
  }
}

std::size_t parameter_count(const Mlp& mlp) {
  std::size_t n = 0;
  for (const auto& layer : mlp.layers) {
    n += layer.weights.data.size() + layer.bias.size();
  }
  return n;
}

double* parameter_ptr(Mlp& mlp, std::size_t index) {
  for (auto& layer : mlp.layers) {
    if (index < layer.weights.data.size()) return &layer.weights.data[index];
    index -= layer.weights.data.size();
    if (index < layer.bias.size()) return &layer.bias[index];
    index -= layer.bias.size();
  }
  throw DomainError("mlp parameter index out of range");
}

double parameter_at(const Mlp& mlp, std::size_t index) {
  return *parameter_ptr(const_cast<Mlp&>(mlp), index);
}

}  // namespace opsurv
