#include "siph/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "siph/decomp.hpp"

namespace siph {

QuadRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  QuadRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton on P_n with the Tricomi initial guess
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = mid - half * x;
    r.nodes[n - 1 - i] = mid + half * x;
    r.weights[i] = half * w;
    r.weights[n - 1 - i] = half * w;
  }
  return r;
}

QuadRule gauss_laguerre_normalized(int n, double alpha) {
  if (n < 1) throw std::invalid_argument("gauss_laguerre_normalized: n < 1");
  if (alpha <= -1.0)
    throw std::invalid_argument("gauss_laguerre_normalized: alpha <= -1");
  // Jacobi matrix of the generalized Laguerre recurrence
  std::vector<double> d(n), e(n), z0(n, 0.0);
  for (int k = 0; k < n; ++k) d[k] = 2.0 * k + alpha + 1.0;
  e[0] = 0.0;
  for (int k = 1; k < n; ++k) e[k] = std::sqrt(k * (k + alpha));
  z0[0] = 1.0;
  tridiag_eigen_first_component(d, e, z0);
  QuadRule r;
  r.nodes = std::move(d);
  r.weights.resize(n);
  for (int k = 0; k < n; ++k) r.weights[k] = z0[k] * z0[k];
  return r;
}

QuadRule tanh_sinh(int n, double a, double b) {
  if (n < 3) n = 3;
  if (!(b > a)) throw std::invalid_argument("tanh_sinh: empty interval");
  const int half_count = n / 2;
  // The transformed integrand of an integrable endpoint singularity x^{-s}
  // decays like exp(-2(1-s) * pi/2 * sinh t); 4.3 pushes the truncated tail
  // below 1e-13 even for s = 3/4, while node-to-endpoint distances
  // (~exp(-pi sinh t)) stay comfortably inside the normal double range.
  const double tmax = 4.3;
  const double dt = tmax / half_count;
  const double half = 0.5 * (b - a);
  QuadRule r;
  for (int k = -half_count; k <= half_count; ++k) {
    const double t = k * dt;
    const double u = 0.5 * M_PI * std::sinh(t);
    const double ch = std::cosh(u);
    const double w = half * dt * 0.5 * M_PI * std::cosh(t) / (ch * ch);
    if (w <= 0.0 || !std::isfinite(w)) continue;
    // Distance from the nearer endpoint, computed without the cancellation
    // of 1 -+ tanh(u); nodes next to an endpoint keep full relative accuracy,
    // which singular integrands need.
    const double e2 = std::exp(-2.0 * std::abs(u));
    const double dist = half * 2.0 * e2 / (1.0 + e2);
    const double node = (k < 0) ? a + dist : b - dist;
    if (node <= a || node >= b) continue;
    r.nodes.push_back(node);
    r.weights.push_back(w);
  }
  return r;
}

QuadRule exp_sinh_log(int n, double log_range) {
  if (n < 3) n = 3;
  if (log_range <= 0.0) throw std::invalid_argument("exp_sinh_log: bad range");
  const double t0 = 3.0;
  const double c = log_range / std::sinh(t0);
  const double dt = 2.0 * t0 / (n - 1);
  QuadRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    const double t = -t0 + k * dt;
    const double theta = std::exp(c * std::sinh(t));
    r.nodes[k] = theta;
    r.weights[k] = theta * c * std::cosh(t) * dt;
  }
  return r;
}

}  // namespace siph
