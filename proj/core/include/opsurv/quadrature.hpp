#pragma once

#include <functional>
#include <vector>

namespace opsurv {

/// Gauss-Legendre rule on [-1, 1]: nodes strictly increasing and symmetric
/// about 0, weights positive and summing to 2. Exact for polynomials of
/// degree <= 2*order - 1.
struct QuadratureRule {
  int order = 0;
  std::vector<double> nodes;
  std::vector<double> weights;

  double top_node() const { return nodes.back(); }
};

inline constexpr int kMaxQuadratureOrder = 64;

/// Nodes via Newton iteration on the Legendre polynomial from Chebyshev
/// initial guesses; weights w = 2 / ((1 - r^2) * P'(r)^2).
QuadratureRule build_rule(int order);

/// Integral of f over [0, t] as (t/2) * sum_g w_g * f((t/2)(r_g + 1)).
double antiderivative_at(const QuadratureRule& rule,
                         const std::function<double(double)>& f, double t);

}  // namespace opsurv
