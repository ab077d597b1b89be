#pragma once

#include <vector>

namespace opsurv {

/// Degree bound for the normalized Hermite basis. The recurrence is stable
/// and the weighted functions decay outside [-5, 5] for degrees up to here.
inline constexpr int kMaxHermiteDegree = 20;

/// Truncation order of the basis: degrees 0..max_degree inclusive.
struct BasisSpec {
  int max_degree = 8;
};

void validate(const BasisSpec& spec);

/// h_j(t): physicists' Hermite polynomial of degree j, normalized so that
/// the self inner product against the weight e^{-t^2} is 1.
double normalized_hermite(int degree, double t);

/// h_j(t) * e^{-t^2/2}. The weight is folded into the recurrence seed so
/// large |t| underflows to 0 instead of producing Inf * 0.
double hermite_function(int degree, double t);

/// All degrees 0..J at one point, single recurrence pass.
std::vector<double> basis_row(const BasisSpec& spec, double t);

/// Weighted variant: element j is h_j(t) * e^{-t^2/2}.
std::vector<double> function_row(const BasisSpec& spec, double t);

/// In-place versions for hot loops; out must have spec.max_degree + 1 slots.
void basis_row_into(const BasisSpec& spec, double t, double* out);
void function_row_into(const BasisSpec& spec, double t, double* out);

}  // namespace opsurv
