#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "opsurv/rng.hpp"

namespace opsurv {

/// Dense row-major matrix, just enough linear algebra for the MLP heads.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
};

struct DenseLayer {
  Matrix weights;            // out x in
  std::vector<double> bias;  // out
};

/// Dense stack with ReLU between hidden layers and a linear last layer.
struct Mlp {
  std::vector<DenseLayer> layers;

  std::size_t input_size() const { return layers.front().weights.cols; }
  std::size_t output_size() const { return layers.back().weights.rows; }
};

/// Pre-activations per layer, kept around for the backward pass.
struct MlpTrace {
  std::vector<std::vector<double>> pre;   // z_l = W_l a_{l-1} + b_l
  std::vector<std::vector<double>> post;  // a_l = relu(z_l), last = z_last
};

Mlp make_mlp(std::size_t in, const std::vector<int>& hidden, std::size_t out);

/// Fills weights and biases with uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)).
void init_uniform(Mlp& mlp, Rng& rng);

std::vector<double> mlp_forward(const Mlp& mlp, std::span<const double> x,
                                MlpTrace* trace = nullptr);

/// Accumulates dL/dW, dL/db into grad (same shape as mlp) given dL/doutput.
/// Requires the trace captured during the matching forward call.
void mlp_backward(const Mlp& mlp, std::span<const double> x,
                  const MlpTrace& trace, std::span<const double> d_out,
                  Mlp& grad);

Mlp zeros_like(const Mlp& mlp);
void scale_in_place(Mlp& mlp, double factor);
void add_scaled(Mlp& dst, const Mlp& src, double factor);
std::size_t parameter_count(const Mlp& mlp);

/// Flat parameter views, used by the finite-difference checks.
double* parameter_ptr(Mlp& mlp, std::size_t index);
double parameter_at(const Mlp& mlp, std::size_t index);

}  // namespace opsurv
