#include "opsurv/hermite.hpp"

#include <cmath>
#include <string>

#include "opsurv/errors.hpp"

namespace opsurv {

namespace {

constexpr double kQuarticRootPiInv = 0.7511255444649424828587030;  // pi^(-1/4)

void check_degree(int degree) {
  if (degree < 0 || degree > kMaxHermiteDegree) {
    throw DomainError("hermite degree out of range: " + std::to_string(degree) +
                      " (cap " + std::to_string(kMaxHermiteDegree) + ")");
  }
}

// Normalized three-term recurrence:
//   h_{j+1}(t) = t*sqrt(2/(j+1))*h_j(t) - sqrt(j/(j+1))*h_{j-1}(t)
// seeded with h_0 = seed. Raw H_j never appears, so no factorial blowup.
double recurrence(int degree, double t, double seed) {
  double prev = seed;
  if (degree == 0) return prev;
  double cur = std::sqrt(2.0) * t * seed;
  for (int j = 1; j < degree; ++j) {
    double next = t * std::sqrt(2.0 / (j + 1)) * cur -
                  std::sqrt(static_cast<double>(j) / (j + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

void row_from_seed(int max_degree, double t, double seed, double* out) {
  out[0] = seed;
  if (max_degree == 0) return;
  out[1] = std::sqrt(2.0) * t * seed;
  for (int j = 1; j < max_degree; ++j) {
    out[j + 1] = t * std::sqrt(2.0 / (j + 1)) * out[j] -
                 std::sqrt(static_cast<double>(j) / (j + 1)) * out[j - 1];
  }
}

}  // namespace

void validate(const BasisSpec& spec) {
  if (spec.max_degree < 0 || spec.max_degree > kMaxHermiteDegree) {
    throw DomainError("basis max_degree out of range: " +
                      std::to_string(spec.max_degree));
  }
}

double normalized_hermite(int degree, double t) {
  check_degree(degree);
  return recurrence(degree, t, kQuarticRootPiInv);
}

double hermite_function(int degree, double t) {
  check_degree(degree);
  return recurrence(degree, t, kQuarticRootPiInv * std::exp(-0.5 * t * t));
}

std::vector<double> basis_row(const BasisSpec& spec, double t) {
  validate(spec);
  std::vector<double> out(static_cast<std::size_t>(spec.max_degree) + 1);
  row_from_seed(spec.max_degree, t, kQuarticRootPiInv, out.data());
  return out;
}

std::vector<double> function_row(const BasisSpec& spec, double t) {
  validate(spec);
  std::vector<double> out(static_cast<std::size_t>(spec.max_degree) + 1);
  row_from_seed(spec.max_degree, t, kQuarticRootPiInv * std::exp(-0.5 * t * t),
                out.data());
  return out;
}

void basis_row_into(const BasisSpec& spec, double t, double* out) {
  row_from_seed(spec.max_degree, t, kQuarticRootPiInv, out);
}

void function_row_into(const BasisSpec& spec, double t, double* out) {
  row_from_seed(spec.max_degree, t, kQuarticRootPiInv * std::exp(-0.5 * t * t),
                out);
}

}  // namespace opsurv
