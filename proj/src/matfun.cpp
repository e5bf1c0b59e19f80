#include "siph/matfun.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "siph/decomp.hpp"
#include "siph/quadrature.hpp"

namespace siph {

namespace {

// Pade coefficients for degrees 3..13 (Higham 2005).
const double B3[] = {120, 60, 12, 1};
const double B5[] = {30240, 15120, 3360, 420, 30, 1};
const double B7[] = {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1};
const double B9[] = {17643225600, 8821612800, 2075673600, 302702400, 30270240,
                     2162160, 110880, 3960, 90, 1};
const double B13[] = {64764752532480000, 32382376266240000, 7771770303897600,
                      1187353796428800,  129060195264000,   10559470521600,
                      670442572800,      33522128640,       1323241920,
                      40840800,          960960,            16380,
                      182,               1};

const double THETA3 = 1.495585217958292e-2;
const double THETA5 = 2.539398330063230e-1;
const double THETA7 = 9.504178996162932e-1;
const double THETA9 = 2.097847961257068e0;
const double THETA13 = 5.371920351148152e0;

// w = c0*I + c2*p2 + c4*p4 + c6*p6 + c8*p8 with scalar multipliers, any of
// p4..p8 may be null.
void poly_even(const Matrix& p2, const Matrix* p4, const Matrix* p6,
               const Matrix* p8, double c0, double c2, double c4, double c6,
               double c8, Matrix& w) {
  const int n = p2.rows();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = c2 * p2(i, j);
      if (p4) v += c4 * (*p4)(i, j);
      if (p6) v += c6 * (*p6)(i, j);
      if (p8) v += c8 * (*p8)(i, j);
      w(i, j) = v + (i == j ? c0 : 0.0);
    }
}

}  // namespace

ScaledExpm::ScaledExpm(Matrix m) : n_(m.rows()), m_(std::move(m)) {
  if (!m_.square()) throw std::invalid_argument("ScaledExpm: matrix not square");
  norm1_ = m_.one_norm();
  if (n_ > 1) {
    m2_ = m_ * m_;
    m4_ = m2_ * m2_;
    m6_ = m2_ * m4_;
    w1_ = Matrix(n_, n_);
    w2_ = Matrix(n_, n_);
    u_ = Matrix(n_, n_);
    v_ = Matrix(n_, n_);
  }
}

Matrix ScaledExpm::eval(double s) const {
  Matrix out(n_, n_);
  eval(s, out);
  return out;
}

void ScaledExpm::eval(double s, Matrix& out) const {
  if (out.rows() != n_ || out.cols() != n_)
    throw std::invalid_argument("ScaledExpm::eval: bad output shape");
  if (n_ == 1) {
    out(0, 0) = std::exp(s * m_(0, 0));
    return;
  }
  const double x = std::abs(s) * norm1_;
  const double s2 = s * s, s4 = s2 * s2, s6 = s4 * s2;

  // out temporarily holds U+V and the solve happens in place.
  if (x <= THETA9) {
    const double* b;
    int deg;
    if (x <= THETA3) { b = B3; deg = 3; }
    else if (x <= THETA5) { b = B5; deg = 5; }
    else if (x <= THETA7) { b = B7; deg = 7; }
    else { b = B9; deg = 9; }
    Matrix* p8 = nullptr;
    if (deg == 9) {
      // A8 = (s^4 M4)^2, reuse w2_ as storage
      matmul_into(m4_, m4_, w2_);
      w2_ *= s4 * s4;
      p8 = &w2_;
    }
    // V (even), then W (odd part before the final A multiply)
    poly_even(m2_, deg >= 5 ? &m4_ : nullptr, deg >= 7 ? &m6_ : nullptr, p8,
              b[0], b[2] * s2, deg >= 5 ? b[4] * s4 : 0.0,
              deg >= 7 ? b[6] * s6 : 0.0, deg >= 9 ? b[8] : 0.0, v_);
    poly_even(m2_, deg >= 5 ? &m4_ : nullptr, deg >= 7 ? &m6_ : nullptr, p8,
              b[1], b[3] * s2, deg >= 5 ? b[5] * s4 : 0.0,
              deg >= 7 ? b[7] * s6 : 0.0, deg >= 9 ? b[9] : 0.0, w1_);
    // U = s * M * W
    matmul_into(m_, w1_, u_);
    u_ *= s;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        out(i, j) = v_(i, j) + u_(i, j);   // V + U
        w1_(i, j) = v_(i, j) - u_(i, j);   // V - U
      }
    Lu lu = lu_factor(std::move(w1_));
    lu_solve(lu, out);
    w1_ = std::move(lu.f);
    return;
  }

  int sigma = static_cast<int>(std::ceil(std::log2(x / THETA13)));
  if (sigma < 0) sigma = 0;
  const double sc = s / std::exp2(sigma);
  const double c2 = sc * sc, c4 = c2 * c2, c6 = c4 * c2;

  // W1 = b13*A6 + b11*A4 + b9*A2 ; U = A * (A6*W1 + b7*A6 + b5*A4 + b3*A2 + b1*I)
  poly_even(m2_, &m4_, &m6_, nullptr, 0.0, B13[9] * c2, B13[11] * c4,
            B13[13] * c6, 0.0, w1_);
  matmul_into(m6_, w1_, w2_);
  w2_ *= c6;
  poly_even(m2_, &m4_, &m6_, nullptr, B13[1], B13[3] * c2, B13[5] * c4,
            B13[7] * c6, 0.0, w1_);
  w1_ += w2_;
  matmul_into(m_, w1_, u_);
  u_ *= sc;
  // V = A6*(b12*A6 + b10*A4 + b8*A2) + b6*A6 + b4*A4 + b2*A2 + b0*I
  poly_even(m2_, &m4_, &m6_, nullptr, 0.0, B13[8] * c2, B13[10] * c4,
            B13[12] * c6, 0.0, w1_);
  matmul_into(m6_, w1_, w2_);
  w2_ *= c6;
  poly_even(m2_, &m4_, &m6_, nullptr, B13[0], B13[2] * c2, B13[4] * c4,
            B13[6] * c6, 0.0, v_);
  v_ += w2_;

  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      out(i, j) = v_(i, j) + u_(i, j);
      w1_(i, j) = v_(i, j) - u_(i, j);
    }
  Lu lu = lu_factor(std::move(w1_));
  lu_solve(lu, out);
  w1_ = std::move(lu.f);

  for (int k = 0; k < sigma; ++k) {
    matmul_into(out, out, w2_);
    std::swap(out, w2_);
  }
}

Matrix expm(const Matrix& a) { return ScaledExpm(a).eval(1.0); }

namespace {

using cd = std::complex<double>;

// Principal square root of an upper triangular matrix.
CMatrix sqrtm_tri(const CMatrix& t) {
  const int n = t.rows();
  CMatrix s(n, n);
  for (int i = 0; i < n; ++i) s(i, i) = std::sqrt(t(i, i));
  for (int d = 1; d < n; ++d) {
    for (int i = 0; i + d < n; ++i) {
      const int j = i + d;
      cd acc = t(i, j);
      for (int k = i + 1; k < j; ++k) acc -= s(i, k) * s(k, j);
      const cd den = s(i, i) + s(j, j);
      if (den == cd(0.0))
        throw std::domain_error("logm: square root recurrence broke down");
      s(i, j) = acc / den;
    }
  }
  return s;
}

double tri_dist_from_identity(const CMatrix& t) {
  double best = 0.0;
  const int n = t.rows();
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const cd v = (i == j) ? t(i, j) - cd(1.0) : t(i, j);
      best = std::max(best, std::abs(v));
    }
  return best;
}

}  // namespace

Matrix logm(const Matrix& a) {
  if (!a.square()) throw std::invalid_argument("logm: matrix not square");
  const int n = a.rows();
  if (n == 1) {
    if (a(0, 0) <= 0.0)
      throw std::domain_error("logm: eigenvalue on the closed negative real axis");
    Matrix r(1, 1);
    r(0, 0) = std::log(a(0, 0));
    return r;
  }
  Schur sd = schur_decompose(a);
  CMatrix t = sd.t;
  const double scale = t.max_abs();
  for (int i = 0; i < n; ++i) {
    const cd lam = t(i, i);
    if (lam.real() <= 0.0 && std::abs(lam.imag()) <= 1e-14 * scale)
      throw std::domain_error("logm: eigenvalue on the closed negative real axis");
  }

  int nroots = 0;
  while (tri_dist_from_identity(t) > 0.25 && nroots < 60) {
    t = sqrtm_tri(t);
    ++nroots;
  }
  if (tri_dist_from_identity(t) > 0.25)
    throw std::runtime_error("logm: inverse scaling did not contract");

  // log(I+X) = sum_j w_j X (I + x_j X)^{-1}, Gauss-Legendre on [0,1].
  const auto gl = gauss_legendre(10, 0.0, 1.0);
  CMatrix x(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) x(i, j) = t(i, j) - (i == j ? cd(1.0) : cd(0.0));
  CMatrix l(n, n);
  CMatrix rhs(n, n), m(n, n);
  for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
    const double xq = gl.nodes[q], wq = gl.weights[q];
    // solve (I + xq X) Y = X; everything upper triangular
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        m(i, j) = xq * x(i, j) + (i == j ? cd(1.0) : cd(0.0));
        rhs(i, j) = x(i, j);
      }
    for (int i = n - 1; i >= 0; --i) {
      for (int j = 0; j < n; ++j) {
        cd acc = rhs(i, j);
        for (int k = i + 1; k < n; ++k) acc -= m(i, k) * rhs(k, j);
        rhs(i, j) = acc / m(i, i);
      }
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) l(i, j) += wq * rhs(i, j);
  }
  const double factor = std::exp2(nroots);
  CMatrix res = sd.q * l;
  res = res * sd.q.adjoint();

  Matrix out(n, n);
  double maximag = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      maximag = std::max(maximag, std::abs(res(i, j).imag()));
      out(i, j) = factor * res(i, j).real();
    }
  if (maximag * factor > 1e-10 * (1.0 + factor * res.max_abs()))
    throw std::runtime_error("logm: result has a non-negligible imaginary part");
  return out;
}

Matrix frac_power(const Matrix& a, double x) {
  if (!a.square()) throw std::invalid_argument("frac_power: matrix not square");
  const double r = std::round(x);
  if (r == x && std::abs(r) <= 64.0) {
    long k = static_cast<long>(r);
    if (k == 0) return Matrix::identity(a.rows());
    if (k == 1) return a;
    Matrix base = (k > 0) ? a : inverse(a);
    if (k < 0) k = -k;
    Matrix acc = Matrix::identity(a.rows());
    while (k > 0) {
      if (k & 1) acc = acc * base;
      k >>= 1;
      if (k) base = base * base;
    }
    return acc;
  }
  Matrix l = logm(a);
  l *= x;
  return expm(l);
}

Matrix kron_prod(const Matrix& a, const Matrix& b) {
  Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (int r = 0; r < b.rows(); ++r)
        for (int c = 0; c < b.cols(); ++c)
          k(i * b.rows() + r, j * b.cols() + c) = aij * b(r, c);
    }
  return k;
}

Matrix kron_sum(const Matrix& a, const Matrix& b) {
  if (!a.square() || !b.square())
    throw std::invalid_argument("kron_sum: matrices must be square");
  Matrix k = kron_prod(a, Matrix::identity(b.rows()));
  k += kron_prod(Matrix::identity(a.rows()), b);
  return k;
}

Matrix van_loan_block(const Matrix& t, const std::vector<double>& v,
                      const std::vector<double>& w) {
  const int n = t.rows();
  if (!t.square() || static_cast<int>(v.size()) != n ||
      static_cast<int>(w.size()) != n)
    throw std::invalid_argument("van_loan_block: shape mismatch");
  Matrix b(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      b(i, j) = t(i, j);
      b(n + i, n + j) = t(i, j);
      b(i, n + j) = v[i] * w[j];
    }
  return b;
}

ConvResult conv_integral(const Matrix& t, const std::vector<double>& v,
                         const std::vector<double>& w, double x) {
  const int n = t.rows();
  const Matrix full = ScaledExpm(van_loan_block(t, v, w)).eval(x);
  ConvResult r{Matrix(n, n), Matrix(n, n)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      r.exp(i, j) = full(i, j);
      r.conv(i, j) = full(i, n + j);
    }
  return r;
}

}  // namespace siph
