#include "siph/matrix.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "siph/simd/kernels.hpp"

namespace siph {

Matrix::Matrix(int rows, int cols)
    : rows_(rows), cols_(cols), d_(static_cast<std::size_t>(rows) * cols, 0.0) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative dimension");
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r ? static_cast<int>(rows.begin()->size()) : 0;
  Matrix m(r, c);
  int i = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c)
      throw std::invalid_argument("Matrix::from_rows: ragged rows");
    int j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_)
    throw std::invalid_argument("Matrix +=: shape mismatch");
  for (std::size_t i = 0; i < d_.size(); ++i) d_[i] += o.d_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_)
    throw std::invalid_argument("Matrix -=: shape mismatch");
  for (std::size_t i = 0; i < d_.size(); ++i) d_[i] -= o.d_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : d_) v *= s;
  return *this;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::one_norm() const {
  double best = 0.0;
  for (int j = 0; j < cols_; ++j) {
    double s = 0.0;
    for (int i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
    if (s > best) best = s;
  }
  return best;
}

double Matrix::max_abs() const {
  double best = 0.0;
  for (double v : d_) best = std::max(best, std::abs(v));
  return best;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

void matmul_into(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols())
    throw std::invalid_argument("matmul_into: shape mismatch");
  simd::active().gemm(a.rows(), b.cols(), a.cols(), a.data(), a.cols(),
                      b.data(), b.cols(), c.data(), c.cols(), accumulate);
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  matmul_into(a, b, c);
  return c;
}

std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
  if (a.cols() != static_cast<int>(x.size()))
    throw std::invalid_argument("matvec: shape mismatch");
  std::vector<double> y(a.rows(), 0.0);
  simd::active().gemm(a.rows(), 1, a.cols(), a.data(), a.cols(), x.data(), 1,
                      y.data(), 1, false);
  return y;
}

std::vector<double> vecmat(const std::vector<double>& x, const Matrix& a) {
  if (a.rows() != static_cast<int>(x.size()))
    throw std::invalid_argument("vecmat: shape mismatch");
  std::vector<double> y(a.cols(), 0.0);
  simd::active().gemm(1, a.cols(), a.rows(), x.data(), a.rows(), a.data(),
                      a.cols(), y.data(), a.cols(), false);
  return y;
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: length mismatch");
  return simd::active().dot(static_cast<int>(x.size()), x.data(), y.data());
}

double dot(const double* x, const double* y, int n) {
  return simd::active().dot(n, x, y);
}

Lu lu_factor(Matrix a) {
  if (!a.square()) throw std::invalid_argument("lu_factor: matrix not square");
  const int n = a.rows();
  Lu lu;
  lu.piv.resize(n);
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::abs(a(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double v = std::abs(a(i, k));
      if (v > best) { best = v; p = i; }
    }
    lu.piv[k] = p;
    if (best == 0.0) { lu.singular = true; continue; }
    if (p != k)
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
    const double inv = 1.0 / a(k, k);
    for (int i = k + 1; i < n; ++i) {
      const double m = a(i, k) * inv;
      a(i, k) = m;
      if (m == 0.0) continue;
      for (int j = k + 1; j < n; ++j) a(i, j) -= m * a(k, j);
    }
  }
  lu.f = std::move(a);
  return lu;
}

void lu_solve(const Lu& lu, Matrix& b) {
  if (lu.singular) throw std::runtime_error("lu_solve: singular matrix");
  const int n = lu.f.rows();
  if (b.rows() != n) throw std::invalid_argument("lu_solve: shape mismatch");
  const int m = b.cols();
  // The factor stores fully swapped rows, so the whole permutation has to be
  // applied before the first elimination touches b.
  for (int k = 0; k < n; ++k)
    if (lu.piv[k] != k)
      for (int j = 0; j < m; ++j) std::swap(b(k, j), b(lu.piv[k], j));
  for (int k = 0; k < n; ++k) {
    for (int i = k + 1; i < n; ++i) {
      const double l = lu.f(i, k);
      if (l == 0.0) continue;
      for (int j = 0; j < m; ++j) b(i, j) -= l * b(k, j);
    }
  }
  for (int k = n - 1; k >= 0; --k) {
    const double inv = 1.0 / lu.f(k, k);
    for (int j = 0; j < m; ++j) b(k, j) *= inv;
    for (int i = 0; i < k; ++i) {
      const double u = lu.f(i, k);
      if (u == 0.0) continue;
      for (int j = 0; j < m; ++j) b(i, j) -= u * b(k, j);
    }
  }
}

Matrix solve(const Matrix& a, Matrix b) {
  Lu lu = lu_factor(a);
  lu_solve(lu, b);
  return b;
}

Matrix inverse(const Matrix& a) { return solve(a, Matrix::identity(a.rows())); }

CMatrix::CMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), d_(static_cast<std::size_t>(rows) * cols) {}

CMatrix CMatrix::identity(int n) {
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::from_real(const Matrix& a) {
  CMatrix m(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  return m;
}

CMatrix CMatrix::adjoint() const {
  CMatrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = std::conj((*this)(i, j));
  return t;
}

double CMatrix::max_abs() const {
  double best = 0.0;
  for (const auto& v : d_) best = std::max(best, std::abs(v));
  return best;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("CMatrix *: shape mismatch");
  CMatrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int l = 0; l < a.cols(); ++l) {
      const std::complex<double> ail = a(i, l);
      if (ail == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += ail * b(l, j);
    }
  }
  return c;
}

}  // namespace siph
