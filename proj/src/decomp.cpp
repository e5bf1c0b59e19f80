#include "siph/decomp.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace siph {

namespace {

using cd = std::complex<double>;

// Householder reduction to upper Hessenberg form, q accumulated.
void hessenberg(CMatrix& h, CMatrix& q) {
  const int n = h.rows();
  std::vector<cd> v(n), w(n);
  for (int k = 0; k + 2 < n; ++k) {
    double xnorm2 = 0.0;
    for (int i = k + 1; i < n; ++i) xnorm2 += std::norm(h(i, k));
    const double xnorm = std::sqrt(xnorm2);
    if (xnorm == 0.0) continue;
    const cd alpha = h(k + 1, k);
    const cd sign = (alpha == cd(0.0)) ? cd(1.0) : alpha / std::abs(alpha);
    // v = x + sign(x0)*||x||*e1; P = I - tau v v^*, tau = 2/(v^*v)
    for (int i = k + 1; i < n; ++i) v[i] = h(i, k);
    v[k + 1] += sign * xnorm;
    double vnorm2 = 0.0;
    for (int i = k + 1; i < n; ++i) vnorm2 += std::norm(v[i]);
    if (vnorm2 == 0.0) continue;
    const double tau = 2.0 / vnorm2;

    // h := P h (rows k+1..n-1, columns k..n-1)
    for (int j = k; j < n; ++j) {
      cd s = 0.0;
      for (int i = k + 1; i < n; ++i) s += std::conj(v[i]) * h(i, j);
      s *= tau;
      for (int i = k + 1; i < n; ++i) h(i, j) -= s * v[i];
    }
    // h := h P (all rows, columns k+1..n-1)
    for (int i = 0; i < n; ++i) {
      cd s = 0.0;
      for (int j = k + 1; j < n; ++j) s += h(i, j) * v[j];
      s *= tau;
      for (int j = k + 1; j < n; ++j) h(i, j) -= s * std::conj(v[j]);
    }
    // q := q P
    for (int i = 0; i < n; ++i) {
      cd s = 0.0;
      for (int j = k + 1; j < n; ++j) s += q(i, j) * v[j];
      s *= tau;
      for (int j = k + 1; j < n; ++j) q(i, j) -= s * std::conj(v[j]);
    }
    for (int i = k + 2; i < n; ++i) h(i, k) = 0.0;
    h(k + 1, k) = -sign * xnorm;
  }
}

// Unitary M = [[c, s], [-conj(s), c]] with c real such that M [f; g] = [r; 0].
void make_givens(cd f, cd g, double& c, cd& s, cd& r) {
  if (g == cd(0.0)) {
    c = 1.0;
    s = 0.0;
    r = f;
    return;
  }
  if (f == cd(0.0)) {
    c = 0.0;
    s = std::conj(g) / std::abs(g);
    r = std::abs(g);
    return;
  }
  const double af = std::abs(f), ag = std::abs(g);
  const double d = std::hypot(af, ag);
  c = af / d;
  const cd fs = f / af;
  s = fs * std::conj(g) / d;
  r = fs * d;
}

// Shifted explicit QR sweep on rows/cols [lo, hi] of h; q accumulated.
void qr_sweep(CMatrix& h, CMatrix& q, int lo, int hi, cd shift) {
  const int n = h.rows();
  for (int k = lo; k <= hi; ++k) h(k, k) -= shift;
  std::vector<double> cs(hi - lo);
  std::vector<cd> ss(hi - lo);
  for (int k = lo; k < hi; ++k) {
    double c;
    cd s, r;
    make_givens(h(k, k), h(k + 1, k), c, s, r);
    cs[k - lo] = c;
    ss[k - lo] = s;
    h(k, k) = r;
    h(k + 1, k) = 0.0;
    for (int j = k + 1; j < n; ++j) {
      const cd t1 = h(k, j), t2 = h(k + 1, j);
      h(k, j) = c * t1 + s * t2;
      h(k + 1, j) = -std::conj(s) * t1 + c * t2;
    }
  }
  for (int k = lo; k < hi; ++k) {
    const double c = cs[k - lo];
    const cd s = ss[k - lo];
    const int top = std::min(k + 2, hi + 1);
    for (int i = 0; i < top; ++i) {
      const cd t1 = h(i, k), t2 = h(i, k + 1);
      h(i, k) = c * t1 + std::conj(s) * t2;
      h(i, k + 1) = -s * t1 + c * t2;
    }
    for (int i = 0; i < n; ++i) {
      const cd t1 = q(i, k), t2 = q(i, k + 1);
      q(i, k) = c * t1 + std::conj(s) * t2;
      q(i, k + 1) = -s * t1 + c * t2;
    }
  }
  for (int k = lo; k <= hi; ++k) h(k, k) += shift;
}

cd wilkinson_shift(const CMatrix& h, int hi) {
  const cd a = h(hi - 1, hi - 1), b = h(hi - 1, hi);
  const cd c = h(hi, hi - 1), d = h(hi, hi);
  const cd tr2 = (a - d) * 0.5;
  cd disc = std::sqrt(tr2 * tr2 + b * c);
  // pick the root closer to d
  const cd l1 = d + tr2 + disc;
  const cd l2 = d + tr2 - disc;
  return (std::abs(l1 - d) < std::abs(l2 - d)) ? l1 : l2;
}

}  // namespace

Schur schur_decompose(const Matrix& a) {
  if (!a.square()) throw std::invalid_argument("schur_decompose: matrix not square");
  const int n = a.rows();
  Schur res{CMatrix::from_real(a), CMatrix::identity(n)};
  if (n <= 1) return res;
  CMatrix& h = res.t;
  CMatrix& q = res.q;
  hessenberg(h, q);

  const double eps = std::numeric_limits<double>::epsilon();
  const double tiny = std::numeric_limits<double>::min();
  int hi = n - 1;
  int stalls = 0;
  long iters = 0;
  const long max_iters = 60L * n;
  while (hi > 0) {
    // deflate converged subdiagonals at the bottom
    bool deflated = false;
    for (int i = hi; i > 0; --i) {
      const double sub = std::abs(h(i, i - 1));
      const double scale = std::abs(h(i - 1, i - 1)) + std::abs(h(i, i));
      if (sub <= eps * scale + tiny) {
        h(i, i - 1) = 0.0;
        if (i == hi) {
          --hi;
          deflated = true;
        }
        if (deflated) break;
      }
    }
    if (deflated || hi == 0) {
      stalls = 0;
      continue;
    }
    // unreduced block [lo, hi]
    int lo = hi;
    while (lo > 0 && h(lo, lo - 1) != cd(0.0)) --lo;
    if (++iters > max_iters)
      throw std::runtime_error("schur_decompose: QR iteration failed to converge");
    cd shift;
    if (++stalls % 12 == 0) {
      // exceptional shift to break symmetry-induced stalls
      shift = h(hi, hi) + cd(1.5 * std::abs(h(hi, hi - 1)), 0.0);
    } else {
      shift = wilkinson_shift(h, hi);
    }
    qr_sweep(h, q, lo, hi, shift);
  }
  // clean strictly-lower noise
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < i; ++j) h(i, j) = 0.0;
  return res;
}

void tridiag_eigen_first_component(std::vector<double>& d, std::vector<double>& e,
                                   std::vector<double>& z0) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return;
  if (static_cast<int>(e.size()) != n || static_cast<int>(z0.size()) != n)
    throw std::invalid_argument("tridiag_eigen_first_component: length mismatch");
  // imtql2 with only the first eigenvector row carried along
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    while (true) {
      int m = l;
      for (; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m == l) break;
      if (++iter > 50)
        throw std::runtime_error("tridiag_eigen_first_component: no convergence");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
      double s = 1.0, c = 1.0, p = 0.0;
      bool underflow = false;
      for (int i = m - 1; i >= l; --i) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          // recover from underflow: split the matrix here and retry
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        const double z1 = z0[i + 1], z2 = z0[i];
        z0[i + 1] = s * z2 + c * z1;
        z0[i] = c * z2 - s * z1;
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
  // sort ascending, carrying z0
  for (int i = 0; i < n - 1; ++i) {
    int k = i;
    for (int j = i + 1; j < n; ++j)
      if (d[j] < d[k]) k = j;
    if (k != i) {
      std::swap(d[i], d[k]);
      std::swap(z0[i], z0[k]);
    }
  }
}

}  // namespace siph
