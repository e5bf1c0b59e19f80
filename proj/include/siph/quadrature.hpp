#pragma once

#include <vector>

namespace siph {

struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [a, b].
QuadRule gauss_legendre(int n, double a, double b);

// Generalized Gauss-Laguerre rule for the weight x^alpha e^{-x} on (0, inf),
// alpha > -1, computed by Golub-Welsch.  Weights are normalized to sum to 1,
// so the rule integrates g against the Gamma(alpha+1, 1) density:
//   ∫ g(x) x^alpha e^{-x} dx / Gamma(alpha+1) ≈ Σ w_j g(x_j).
QuadRule gauss_laguerre_normalized(int n, double alpha);

// Tanh-sinh rule on the open interval (a, b); n is rounded up to the next
// odd count.  Handles integrable endpoint singularities.
QuadRule tanh_sinh(int n, double a, double b);

// Double-exponential grid for ∫_0^inf g(θ) dθ through θ = exp(c sinh t):
// node positions span roughly [e^-log_range, e^+log_range] with clustering
// near θ = 1.  Weights include the Jacobian, so Σ w_j g(θ_j) ≈ ∫ g.
QuadRule exp_sinh_log(int n, double log_range);

}  // namespace siph
