#include "opsurv/quadrature.hpp"

#include <cmath>
#include <string>

#include "opsurv/errors.hpp"

namespace opsurv {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kResidualTol = 1e-14;
constexpr int kMaxNewtonSteps = 100;

// P_n(x) and P_n'(x) by the standard three-term recurrence.
void legendre_and_derivative(int n, double x, double& p, double& dp) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

QuadratureRule build_rule(int order) {
  if (order < 1 || order > kMaxQuadratureOrder) {
    throw DomainError("quadrature order out of range: " +
                      std::to_string(order));
  }
  QuadratureRule rule;
  rule.order = order;
  rule.nodes.resize(order);
  rule.weights.resize(order);

  if (order == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
    return rule;
  }

  // Solve the upper half and mirror, so symmetry is exact.
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double p = 0.0, dp = 1.0;
    bool converged = false;
    for (int step = 0; step < kMaxNewtonSteps; ++step) {
      legendre_and_derivative(order, x, p, dp);
      // Residual target first; at high orders the attainable residual is
      // bounded below by |P'| * eps, so a sub-ulp Newton step also counts
      // as converged.
      const double delta = p / dp;
      if (std::fabs(p) < kResidualTol ||
          std::fabs(delta) <= 4.0 * 2.22e-16 * std::max(1.0, std::fabs(x))) {
        converged = true;
        break;
      }
      x -= delta;
    }
    if (!converged) {
      throw NumericError("legendre root search did not converge at order " +
                         std::to_string(order));
    }
    legendre_and_derivative(order, x, p, dp);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // i = 0 is the guess nearest +1; fill from both ends inward.
    rule.nodes[order - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[order - 1 - i] = w;
    rule.weights[i] = w;
  }
  if (order % 2 == 1) {
    rule.nodes[order / 2] = 0.0;
    // Midpoint weight from the mirrored Newton solve is already set when
    // x converged to ~0; recompute cleanly at exactly 0.
    double p = 0.0, dp = 1.0;
    legendre_and_derivative(order, 0.0, p, dp);
    rule.weights[order / 2] = 2.0 / (dp * dp);
  }
  return rule;
}

double antiderivative_at(const QuadratureRule& rule,
                         const std::function<double(double)>& f, double t) {
  if (t < 0.0) {
    throw DomainError("antiderivative_at requires t >= 0, got " +
                      std::to_string(t));
  }
  if (t == 0.0) return 0.0;
  const double half = 0.5 * t;
  double acc = 0.0;
  for (int g = 0; g < rule.order; ++g) {
    acc += rule.weights[g] * f(half * (rule.nodes[g] + 1.0));
  }
  return half * acc;
}

}  // namespace opsurv
